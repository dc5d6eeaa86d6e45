"""Seeded random generators for filtrations, martingales, atoms and metric clouds."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..atomic import SimpleAtom, _inv, _qnorm
from ..dyadic_geometry import QuasiMetricSpace
from ..homogeneous import decay_profile
from ..measure_space import Filtration, MeasureSpace

FAMILIES = ("gaussian_martingale", "rademacher_bmo", "atom", "lipschitz", "multiplier", "metric_cloud")


def random_tree(rng: np.random.Generator, n: int, max_levels: int = 12, regular: bool = False) -> tuple[MeasureSpace, Filtration]:
    """Nested partitions of ``range(n)`` into contiguous blocks.

    Regular trees halve every block and use weights within a factor 1.5 of
    each other; general trees cut each block into 2 to 4 pieces at random
    positions and use exponential weights.
    """
    bounds = np.array([0, n])
    labels = [np.zeros(n, dtype=np.intp)]
    while len(labels) < max_levels:
        s, e = bounds[:-1], bounds[1:]
        wide = (e - s) > 1
        if not wide.any():
            break
        s, e = s[wide], e[wide]
        if regular:
            cuts = s + (e - s) // 2 + ((e - s) % 2) * rng.integers(0, 2, size=s.size)
        else:
            k = rng.integers(1, 4, size=s.size)
            pos = s[:, None] + 1 + np.floor(rng.random((s.size, 3)) * (e - s - 1)[:, None]).astype(np.intp)
            cuts = pos[np.arange(3)[None, :] < k[:, None]]
        bounds = np.union1d(bounds, cuts)
        lab = np.zeros(n, dtype=np.intp)
        lab[bounds[1:-1]] = 1
        labels.append(np.cumsum(lab))
    if regular:
        w = 1.0 + 0.5 * rng.random(n)
    else:
        w = rng.exponential(size=n) + 0.05
    space = MeasureSpace.normalized(w)
    return space, Filtration.from_labels(np.array(labels), 0)


def _diff_of(space: MeasureSpace, filt: Filtration, k: int, z: np.ndarray) -> np.ndarray:
    """``z - E_{k-1} z`` for an ``F_k``-measurable ``z``."""
    return z - filt.expectation(space, k - 1, z)


def gaussian_martingale(rng: np.random.Generator, space: MeasureSpace, filt: Filtration) -> np.ndarray:
    """Sum of Gaussian differences with random per-level scales and a random mean."""
    closed = filt.closed()
    f = np.full(space.n, rng.standard_normal())
    for k in list(closed.levels)[1:]:
        z = rng.standard_normal(closed.index(k).n_blocks)[closed.labels(k)]
        f = f + 10.0 ** rng.uniform(-1, 1) * _diff_of(space, closed, k, z)
    return f


def rademacher_bmo(rng: np.random.Generator, space: MeasureSpace, filt: Filtration, decay: float = 0.7) -> np.ndarray:
    """Mean-zero martingale with centered random-sign differences of summable size."""
    closed = filt.closed()
    g = np.zeros(space.n)
    for j, k in enumerate(list(closed.levels)[1:]):
        eps = rng.choice([-1.0, 1.0], size=closed.index(k).n_blocks)[closed.labels(k)]
        g = g + decay**j * rng.uniform(0.5, 1.5) * _diff_of(space, closed, k, eps)
    return g


def lipschitz_martingale(rng: np.random.Generator, space: MeasureSpace, filt: Filtration, p: float) -> np.ndarray:
    """Differences ``m_k^alpha eps_k`` (centered) with ``m_k`` the level-k block mass."""
    alpha = 1.0 / p - 1.0
    closed = filt.closed()
    g = np.full(space.n, rng.standard_normal())
    for k in list(closed.levels)[1:]:
        idx = closed.index(k)
        mass = idx.block_sums(space.weights)
        z = (mass**alpha * rng.choice([-1.0, 1.0], size=idx.n_blocks) * rng.uniform(0.2, 1.0))[idx.labels]
        g = g + _diff_of(space, closed, k, z)
    return g


def random_atom(rng: np.random.Generator, space: MeasureSpace, filt: Filtration, p: float, q: float) -> SimpleAtom:
    """Size-normalized mean-zero function on a random block with at least two points."""
    closed = filt.closed()
    choices = []
    for k in closed.levels:
        idx = closed.index(k)
        for b in np.flatnonzero(idx.sizes >= 2):
            choices.append((k, int(b)))
    k, b = choices[rng.integers(len(choices))]
    members = np.flatnonzero(closed.labels(k) == b)
    w = space.weights
    v = np.zeros(space.n)
    v[members] = rng.standard_normal(members.size) * 10.0 ** rng.uniform(-1, 1, size=members.size)
    v[members] -= np.sum(w[members] * v[members]) / np.sum(w[members])
    mass = float(np.sum(w[members]))
    v *= mass ** (_inv(q) - 1.0 / p) / _qnorm(w, v, q)
    return SimpleAtom(v, k, tuple(members.tolist()), p, q)


def atom_sum(rng: np.random.Generator, space: MeasureSpace, filt: Filtration, p: float, q: float = np.inf, terms: int = 4) -> np.ndarray:
    """Finite combination of random simple atoms."""
    f = np.zeros(space.n)
    for _ in range(int(rng.integers(1, terms + 1))):
        f = f + rng.standard_normal() * random_atom(rng, space, filt, p, q).values
    return f


def metric_cloud(rng: np.random.Generator, n: int, kind: str = "line", scale: float = 1.0) -> QuasiMetricSpace:
    """Random points: ``line`` on ``[0, scale)``, ``plane`` in the unit square, or ``circle``."""
    if kind == "line":
        x = np.sort(rng.random(n)) * scale
        return QuasiMetricSpace.from_coords(x, np.full(n, scale / n))
    if kind == "plane":
        return QuasiMetricSpace.from_coords(rng.random((n, 2)))
    if kind == "circle":
        return QuasiMetricSpace.circle(rng.random(n))
    raise ValueError(f"unknown cloud kind {kind!r}")


def multiplier_function(rng: np.random.Generator, space: QuasiMetricSpace, O: int, p: float) -> np.ndarray:
    """Test function: the decay profile times a slowly varying random factor."""
    d = space.dist[:, O]
    phase = rng.uniform(0, 2 * np.pi)
    return rng.uniform(0.2, 2.0) * decay_profile(space, O, p) * (0.75 + 0.25 * np.cos(phase + d))


@dataclass(frozen=True)
class Sampler:
    """Seeded request for one random object of a family."""

    family: str
    seed: int
    n: int = 64
    params: dict = field(default_factory=dict)


def sample(sampler: Sampler):
    """Deterministic object for the sampler; identical inputs give identical bits."""
    if sampler.family not in FAMILIES:
        raise ValueError(f"unknown sampler family {sampler.family!r}")
    rng = np.random.default_rng(sampler.seed)
    prm = dict(sampler.params)
    if sampler.family == "metric_cloud":
        return metric_cloud(rng, sampler.n, prm.get("kind", "line"), prm.get("scale", 1.0))
    if sampler.family == "multiplier":
        space = metric_cloud(rng, sampler.n, "line", prm.get("scale", 8.0))
        O = int(prm.get("O", 0))
        return space, O, multiplier_function(rng, space, O, prm.get("p", 1.0))
    space, filt = random_tree(rng, sampler.n, prm.get("max_levels", 12), prm.get("regular", False))
    if sampler.family == "gaussian_martingale":
        return space, filt, gaussian_martingale(rng, space, filt)
    if sampler.family == "rademacher_bmo":
        return space, filt, rademacher_bmo(rng, space, filt)
    if sampler.family == "lipschitz":
        return space, filt, lipschitz_martingale(rng, space, filt, prm.get("p", 0.5))
    return space, filt, random_atom(rng, space, filt, prm.get("p", 1.0), prm.get("q", np.inf))
