"""Quasi-metric measure spaces, greedy nets, dyadic cube systems and ball covering.

Balls are open: ``B(x, r) = {y : d(x, y) < r}``. Distinct points at distance
zero are treated as one location; they always share every cube.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .measure_space import PROBABILITY, SIGMA_FINITE, Filtration, MeasureSpace, ValidationReport


@dataclass(frozen=True, eq=False)
class QuasiMetricSpace:
    """Finite point set with a distance matrix, a measure and a quasi-triangle constant.

    ``A0`` may be omitted, in which case it is computed exhaustively (or by
    sampling above 512 points).
    """

    dist: np.ndarray
    weights: np.ndarray
    A0: float | None = None
    coords: np.ndarray | None = None
    metric: str = "matrix"

    def __post_init__(self):
        d = np.array(self.dist, dtype=float)
        w = np.array(self.weights, dtype=float)
        n = w.size
        if d.shape != (n, n):
            raise ValueError(f"distance matrix has shape {d.shape}, expected ({n}, {n})")
        if not np.all(np.isfinite(d)) or np.any(d < 0):
            raise ValueError("distances must be finite and nonnegative")
        if np.any(np.diag(d) != 0):
            raise ValueError("distance matrix must vanish on the diagonal")
        if np.max(np.abs(d - d.T), initial=0.0) > 1e-12 * max(1.0, float(d.max(initial=0.0))):
            raise ValueError("distance matrix must be symmetric")
        if w.ndim != 1 or n == 0 or np.any(w <= 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and strictly positive")
        d = 0.5 * (d + d.T)
        d.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "dist", d)
        object.__setattr__(self, "weights", w)
        if self.coords is not None:
            c = np.array(self.coords, dtype=float)
            c = c[:, None] if c.ndim == 1 else c
            c.setflags(write=False)
            object.__setattr__(self, "coords", c)
        if self.A0 is None:
            object.__setattr__(self, "A0", quasi_triangle_constant(d))
        elif self.A0 < 1:
            raise ValueError("A0 must be at least 1")

    @classmethod
    def from_coords(cls, coords, weights=None, A0: float | None = 1.0) -> "QuasiMetricSpace":
        """Euclidean points; weights default to ``1/n`` each."""
        c = np.asarray(coords, dtype=float)
        c = c[:, None] if c.ndim == 1 else c
        d = np.sqrt(np.sum((c[:, None, :] - c[None, :, :]) ** 2, axis=-1))
        w = np.full(len(c), 1.0 / len(c)) if weights is None else weights
        return cls(d, w, A0, c, "euclidean")

    @classmethod
    def circle(cls, positions, circumference: float = 1.0, weights=None) -> "QuasiMetricSpace":
        """Arc-length metric on a circle, points given by their arc position."""
        x = np.mod(np.asarray(positions, dtype=float), circumference)
        gap = np.abs(x[:, None] - x[None, :])
        d = np.minimum(gap, circumference - gap)
        w = np.full(len(x), 1.0 / len(x)) if weights is None else weights
        return cls(d, w, 1.0, None, "circle")

    @property
    def n(self) -> int:
        return self.weights.size

    @property
    def dim(self) -> int | None:
        return None if self.coords is None else self.coords.shape[1]

    def measure_space(self) -> MeasureSpace:
        kind = PROBABILITY if abs(float(np.sum(self.weights)) - 1.0) <= 1e-12 else SIGMA_FINITE
        return MeasureSpace(self.weights, kind)

    def ball(self, x: int, r: float) -> np.ndarray:
        return np.flatnonzero(self.dist[x] < r)

    def ball_measure(self, x: int, r: float) -> float:
        return float(np.sum(self.weights[self.dist[x] < r]))

    def diameter(self, idx=None) -> float:
        if idx is None:
            return float(self.dist.max())
        idx = np.asarray(idx, dtype=int)
        return float(self.dist[np.ix_(idx, idx)].max(initial=0.0))

    def to_json(self) -> dict:
        out = {"weights": self.weights.tolist(), "A0": self.A0, "metric": self.metric}
        if self.coords is not None and self.metric == "euclidean":
            out["coordinates"] = self.coords.tolist()
        else:
            out["distances"] = self.dist.tolist()
        return out

    @classmethod
    def from_json(cls, data: dict) -> "QuasiMetricSpace":
        if "weights" not in data:
            raise ValueError("metric space JSON needs 'weights'")
        if "coordinates" in data:
            return cls.from_coords(data["coordinates"], data["weights"], data.get("A0", 1.0))
        if "distances" in data:
            return cls(np.asarray(data["distances"], dtype=float), data["weights"], data.get("A0"))
        raise ValueError("metric space JSON needs 'coordinates' or 'distances'")


def quasi_triangle_constant(dist: np.ndarray, max_exhaustive: int = 512, samples: int = 200_000, seed: int = 0) -> float:
    """``max d(x, y) / (d(x, z) + d(z, y))`` over triples (exhaustive up to ``max_exhaustive`` points)."""
    n = dist.shape[0]
    best = 1.0
    if n <= max_exhaustive:
        for z in range(n):
            den = dist[:, z][:, None] + dist[z, :][None, :]
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(den > 0, dist / den, 0.0)
            best = max(best, float(ratio.max()))
        return best
    rng = np.random.default_rng(seed)
    x, y, z = rng.integers(0, n, size=(3, samples))
    den = dist[x, z] + dist[z, y]
    ok = den > 0
    return max(best, float(np.max(dist[x, y][ok] / den[ok], initial=1.0)))


@dataclass(frozen=True)
class DoublingConstants:
    A0: float
    C_mu: float
    A1: int


def doubling_exponent(space: QuasiMetricSpace) -> float:
    """``max log2(mu B(x, 2r) / mu B(x, r))`` over every radius where either ball changes.

    Both ball measures are left-continuous step functions of ``r`` jumping at
    the distances ``d`` and ``d/2``; the ratio is constant between consecutive
    jump radii, so evaluating at the jump radii is exact.
    """
    best = 0.0
    for x in range(space.n):
        order = np.argsort(space.dist[x], kind="stable")
        ds = space.dist[x][order]
        cum = np.r_[0.0, np.cumsum(space.weights[order])]
        radii = np.unique(np.r_[ds[ds > 0], ds[ds > 0] / 2])
        small = cum[np.searchsorted(ds, radii, side="left")]
        big = cum[np.searchsorted(ds, 2 * radii, side="left")]
        best = max(best, float(np.max(np.log2(big / small), initial=0.0)))
    return best


def covering_number(space: QuasiMetricSpace, max_radii: int = 8) -> int:
    """Greedy estimate of how many half-radius balls cover a ball (max over samples)."""
    best = 1
    for x in range(space.n):
        ds = np.unique(space.dist[x][space.dist[x] > 0])
        if ds.size == 0:
            continue
        picks = ds[np.unique(np.linspace(0, ds.size - 1, min(max_radii, ds.size)).astype(int))]
        for r in picks:
            members = np.flatnonzero(space.dist[x] < r)
            members = members[np.argsort(space.dist[x][members], kind="stable")]
            uncovered = np.ones(members.size, dtype=bool)
            count = 0
            while uncovered.any():
                c = members[np.argmax(uncovered)]
                uncovered &= space.dist[c][members] >= r / 2
                count += 1
            best = max(best, count)
    return best


def estimate_constants(space: QuasiMetricSpace, max_radii: int = 8) -> DoublingConstants:
    """Quasi-triangle constant, doubling exponent and greedy covering number."""
    return DoublingConstants(quasi_triangle_constant(space.dist), doubling_exponent(space), covering_number(space, max_radii))


def greedy_net(space: QuasiMetricSpace, r: float, order=None, start=()) -> list[int]:
    """Maximal ``r``-separated subset picked greedily in ``order``.

    Points in ``start`` are kept first (they must already be ``r``-separated);
    every point ends up at distance ``< r`` from the net.
    """
    if not r > 0:
        raise ValueError("net radius must be positive")
    order = range(space.n) if order is None else order
    net = list(start)
    gap = np.full(space.n, np.inf)
    for c in net:
        gap = np.minimum(gap, space.dist[c])
    for i in order:
        if gap[i] >= r:
            net.append(int(i))
            gap = np.minimum(gap, space.dist[i])
    return net


@dataclass(frozen=True, eq=False)
class DyadicSystem:
    """Nested cube partitions for levels ``k_min .. k_min + len(labels) - 1``.

    ``labels[j][x]`` is the index of the level-``(k_min + j)`` cube holding
    point ``x``; ``centers[j][a]`` is the reference point of cube ``a`` and
    ``parents[j][a]`` the index of its parent cube one level up.
    """

    k_min: int
    labels: np.ndarray
    centers: tuple
    parents: tuple
    weights: np.ndarray
    delta: float
    c0: float | None = None
    C0: float | None = None
    A0: float = 1.0
    kind: str = "hk"
    boxes: tuple = field(default=())

    @property
    def k_max(self) -> int:
        return self.k_min + self.labels.shape[0] - 1

    @property
    def levels(self) -> range:
        return range(self.k_min, self.k_max + 1)

    @property
    def c1(self) -> float | None:
        return None if self.c0 is None else self.c0 / (3 * self.A0**2)

    @property
    def C1(self) -> float | None:
        return None if self.C0 is None else 2 * self.A0 * self.C0

    def level_labels(self, k: int) -> np.ndarray:
        return self.labels[k - self.k_min]

    def level_centers(self, k: int) -> np.ndarray:
        return self.centers[k - self.k_min]

    def n_cubes(self, k: int) -> int:
        return len(self.centers[k - self.k_min])

    def cube(self, k: int, a: int) -> np.ndarray:
        return np.flatnonzero(self.level_labels(k) == a)

    def cubes(self, k: int) -> list[np.ndarray]:
        lab = self.level_labels(k)
        order = np.argsort(lab, kind="stable")
        cuts = np.flatnonzero(np.diff(lab[order])) + 1
        return np.split(order, cuts)

    def to_json(self) -> dict:
        levels = []
        for k in self.levels:
            j = k - self.k_min
            levels.append(
                {
                    "k": k,
                    "cubes": [
                        {"center": int(self.centers[j][a]), "parent": int(self.parents[j][a]), "members": m.tolist()}
                        for a, m in enumerate(self.cubes(k))
                    ],
                }
            )
        return {
            "k_min": self.k_min,
            "kind": self.kind,
            "params": {"delta": self.delta, "c0": self.c0, "C0": self.C0, "A0": self.A0},
            "weights": self.weights.tolist(),
            "levels": levels,
        }

    @classmethod
    def from_json(cls, data: dict) -> "DyadicSystem":
        try:
            levels = data["levels"]
            n = len(data["weights"])
            labels = np.full((len(levels), n), -1, dtype=np.intp)
            centers, parents = [], []
            for j, lev in enumerate(levels):
                centers.append(np.array([c["center"] for c in lev["cubes"]], dtype=np.intp))
                parents.append(np.array([c["parent"] for c in lev["cubes"]], dtype=np.intp))
                for a, c in enumerate(lev["cubes"]):
                    labels[j, c["members"]] = a
            prm = data.get("params", {})
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed dyadic system JSON: missing or invalid field {exc}") from None
        if np.any(labels < 0):
            raise ValueError("dyadic system JSON leaves points without a cube")
        return cls(
            int(data["k_min"]),
            labels,
            tuple(centers),
            tuple(parents),
            np.asarray(data["weights"], dtype=float),
            float(prm.get("delta", 0.5)),
            prm.get("c0"),
            prm.get("C0"),
            float(prm.get("A0", 1.0)),
            data.get("kind", "hk"),
        )


def _auto_range(space: QuasiMetricSpace, delta: float, c0: float) -> tuple[int, int]:
    d = space.dist
    diam = float(d.max())
    positive = d[d > 0]
    if diam == 0:
        return 0, 0
    k_min = math.ceil(math.log(diam / c0) / math.log(delta)) - 1
    k_max = math.ceil(math.log(float(positive.min()) / c0) / math.log(delta))
    k_min = min(k_min, 0)
    return k_min, max(k_max, k_min)


def _nearest(dist_rows: np.ndarray) -> np.ndarray:
    """Index of the closest row per column, ties to the smallest index."""
    return np.argmin(dist_rows, axis=0)


def _hk_once(space: QuasiMetricSpace, delta, c0, C0, k_min, k_max, order) -> DyadicSystem:
    nets = []
    for k in range(k_min, k_max + 1):
        nets.append(greedy_net(space, c0 * delta**k, order, nets[-1] if nets else ()))
    n_lev = len(nets)
    centers = [np.array(net, dtype=np.intp) for net in nets]
    parents = [np.full(len(centers[0]), -1, dtype=np.intp)]
    for j in range(1, n_lev):
        parents.append(_nearest(space.dist[np.ix_(centers[j - 1], centers[j])]).astype(np.intp))
    labels = np.empty((n_lev, space.n), dtype=np.intp)
    labels[-1] = _nearest(space.dist[centers[-1]])
    for j in range(n_lev - 2, -1, -1):
        labels[j] = parents[j + 1][labels[j + 1]]
    return DyadicSystem(k_min, labels, tuple(centers), tuple(parents), space.weights, delta, c0, C0, space.A0, "hk")


def build_dyadic_system(
    space: QuasiMetricSpace,
    delta: float,
    c0: float = 1.0,
    C0: float = 1.0,
    k_range: tuple[int, int] | None = None,
    seed: int | None = None,
    max_retries: int = 8,
) -> DyadicSystem:
    """Cube system from nested greedy nets at radii ``c0 delta^k``.

    Nets are nested (each level extends the coarser one), every center picks
    the closest center one level up as parent (ties by index), and each point
    joins the closest finest-level center. Points therefore inherit their
    cubes from the parent chain, which makes the levels nested by construction.
    ``seed=None`` scans points in input order; otherwise a seeded permutation
    is used, and failed verifications retry with fresh permutations.
    """
    A0 = space.A0
    if not (0 < delta < 1):
        raise ValueError("delta must lie in (0, 1)")
    if not 0 < c0 <= C0:
        raise ValueError("need 0 < c0 <= C0")
    if 12 * A0**3 * C0 * delta > c0:
        raise ValueError(f"parameters violate 12*A0^3*C0*delta <= c0 ({12 * A0**3 * C0 * delta:.6g} > {c0:.6g})")
    k_min, k_max = k_range if k_range is not None else _auto_range(space, delta, c0)
    rng = np.random.default_rng(seed)
    last = None
    for attempt in range(max_retries + 1):
        order = np.arange(space.n) if seed is None and attempt == 0 else rng.permutation(space.n)
        system = _hk_once(space, delta, c0, C0, k_min, k_max, order)
        report = verify_system(space, system)
        if report.ok:
            return system
        last = report
    raise ValueError("dyadic construction failed verification: " + "; ".join(last.violations[:10]))


def verify_system(space: QuasiMetricSpace, system: DyadicSystem) -> ValidationReport:
    """Check partition, nesting, and (for metric constructions) sandwich, separation and coverage."""
    report = ValidationReport()
    d = space.dist
    if system.labels.shape[1] != space.n:
        report.violations.append("system and space have different point counts")
        return report
    for k in system.levels:
        j = k - system.k_min
        lab = system.labels[j]
        nc = len(system.centers[j])
        if lab.min() < 0 or lab.max() >= nc:
            report.violations.append(f"level {k}: labels outside 0..{nc - 1}")
            continue
        sizes = np.bincount(lab, minlength=nc)
        if np.any(sizes == 0):
            report.violations.append(f"level {k}: empty cubes {np.flatnonzero(sizes == 0).tolist()}")
        if j > 0:
            par = system.labels[j - 1]
            expect = system.parents[j][lab]
            bad = np.flatnonzero(expect != par)
            if bad.size:
                report.violations.append(f"level {k}: points {bad[:5].tolist()} leave their parent cube")
        if system.c0 is None:
            continue
        cen = system.centers[j]
        rows = d[cen]
        inner = (rows < system.c1 * system.delta**k) & (lab[None, :] != np.arange(nc)[:, None])
        if inner.any():
            a, x = np.argwhere(inner)[0]
            report.violations.append(f"level {k}: point {x} is in the inner ball of cube {a} but not in the cube")
        outer = (rows >= system.C1 * system.delta**k) & (lab[None, :] == np.arange(nc)[:, None])
        if outer.any():
            a, x = np.argwhere(outer)[0]
            report.violations.append(f"level {k}: point {x} of cube {a} lies outside the outer ball")
        sep = d[np.ix_(cen, cen)].copy()
        np.fill_diagonal(sep, np.inf)
        if nc > 1 and sep.min() < system.c0 * system.delta**k:
            report.violations.append(f"level {k}: centers closer than c0*delta^k")
        if np.any(rows.min(axis=0) >= system.C0 * system.delta**k):
            report.violations.append(f"level {k}: some point is not within C0*delta^k of a center")
    return report


def system_to_filtration(system: DyadicSystem) -> tuple[MeasureSpace, Filtration]:
    """Measure space and two-sided filtration generated by the cubes."""
    w = system.weights
    kind = PROBABILITY if abs(float(np.sum(w)) - 1.0) <= 1e-12 else SIGMA_FINITE
    filt = Filtration.from_labels(system.labels, system.k_min)
    return MeasureSpace(w, kind), filt


# ---------------------------------------------------------------------------
# Euclidean shifted grids


def euclidean_system(space: QuasiMetricSpace, shift, depth: int, k_min: int) -> DyadicSystem:
    """Cubes ``2^-k ([0,1)^dim + m + (-1)^k shift/3)`` for ``k_min <= k <= depth``.

    Finest-level indices come from the coordinates; coarser ones use the exact
    integer relation ``m_k = floor((m_{k+1} - (-1)^k t) / 2)``.
    """
    x = space.coords
    t = np.asarray(shift, dtype=np.int64)
    n_lev = depth - k_min + 1
    idx = np.empty((n_lev, space.n, x.shape[1]), dtype=np.int64)
    sign = 1 if depth % 2 == 0 else -1
    idx[-1] = np.floor(x * 2.0**depth - sign * t / 3.0).astype(np.int64)
    for j in range(n_lev - 2, -1, -1):
        k = k_min + j
        sgn = 1 if k % 2 == 0 else -1
        idx[j] = np.floor_divide(idx[j + 1] - sgn * t, 2)
    labels = np.empty((n_lev, space.n), dtype=np.intp)
    centers, parents, boxes = [], [], []
    for j in range(n_lev):
        k = k_min + j
        keys, inv = np.unique(idx[j], axis=0, return_inverse=True)
        labels[j] = inv.ravel()
        sgn = 1 if k % 2 == 0 else -1
        lower = (keys + sgn * t / 3.0) * 2.0**-k
        mid = lower + 0.5 * 2.0**-k
        cen = np.empty(len(keys), dtype=np.intp)
        for a in range(len(keys)):
            members = np.flatnonzero(labels[j] == a)
            cen[a] = members[np.argmin(np.sum((x[members] - mid[a]) ** 2, axis=1))]
        centers.append(cen)
        boxes.append(lower)
        if j == 0:
            parents.append(np.full(len(keys), -1, dtype=np.intp))
        else:
            first = np.array([np.flatnonzero(labels[j] == a)[0] for a in range(len(keys))])
            parents.append(labels[j - 1][first])
    return DyadicSystem(k_min, labels, tuple(centers), tuple(parents), space.weights, 0.5, None, None, 1.0, "euclidean", tuple(boxes))


@dataclass(frozen=True, eq=False)
class AdjacentSystems:
    """Finite family of dyadic systems on one space with its achieved covering constant."""

    space: QuasiMetricSpace
    systems: tuple
    C: float
    witnesses: tuple = ()

    @property
    def K(self) -> int:
        return len(self.systems)


def euclidean_shifted_grids(space: QuasiMetricSpace, depth: int | None = None, shifts=None, k_min: int | None = None) -> AdjacentSystems:
    """Shifted dyadic grids on points of ``[0, 1)^dim`` with a certified covering constant.

    Default shifts are ``{0, 1, 2}^dim`` (offsets in thirds), so ``K = 3^dim``.
    Along each axis the three grids have disjoint boundary sets with joint
    spacing ``2^-k / 3``, so any ball of radius ``r`` fits in a cube of side
    below ``6r``; the achieved constant is measured over the whole ball family.
    """
    if space.coords is None:
        raise ValueError("shifted grids need coordinates")
    dim = space.dim
    if dim not in (1, 2):
        raise ValueError("shifted grids support dim 1 or 2")
    if np.any(space.coords < 0) or np.any(space.coords >= 1):
        raise ValueError("shifted grids expect coordinates in [0, 1)")
    shifts = [tuple(s) for s in product(range(3), repeat=dim)] if shifts is None else [tuple(np.atleast_1d(s)) for s in shifts]
    positive = space.dist[space.dist > 0]
    if depth is None:
        depth = max(1, math.ceil(math.log2(math.sqrt(dim) / float(positive.min()))) + 1) if positive.size else 1
    if k_min is None:
        reach = float(space.dist.max())
        k_min = min(0, -math.ceil(math.log2(3 * reach))) if reach > 0 else 0
        while True:
            trial = [euclidean_system(space, t, k_min, k_min) for t in shifts]
            if all(s.n_cubes(k_min) == 1 for s in trial):
                break
            k_min -= 1
    systems = tuple(euclidean_system(space, t, depth, k_min) for t in shifts)
    C, witnesses = covering_constant(space, systems)
    return AdjacentSystems(space, systems, C, tuple(witnesses))


# ---------------------------------------------------------------------------
# covering


def _cube_diameters(space: QuasiMetricSpace, system: DyadicSystem) -> list[np.ndarray]:
    out = []
    for k in system.levels:
        diam = np.array([space.diameter(m) for m in system.cubes(k)])
        out.append(diam)
    return out


def covering_constant(space: QuasiMetricSpace, systems, tight: bool = False, n_witnesses: int = 5):
    """Worst ratio ``diam(Q)/r`` over the point-pair ball family, best cube per ball.

    The family holds every ``B(x_i, d(x_i, x_j))``, the whole space (radius just
    above the largest distance from the center), and the singleton guard
    ``B(x_i, eps)`` which only a zero-diameter cube covers. With ``tight`` the
    radius of each ball is the smallest one giving the same point set.
    Returns the constant and the worst balls as ``(ratio, center, radius)``.
    """
    diams = [_cube_diameters(space, s) for s in systems]
    worst = []
    for x in range(space.n):
        order = np.argsort(space.dist[x], kind="stable")
        ds = space.dist[x][order]
        fm, dm = [], []
        for s, sd in zip(systems, diams):
            for j in range(s.labels.shape[0]):
                lab = s.labels[j][order]
                off = np.flatnonzero(lab != lab[0])
                fm.append(off[0] if off.size else space.n)
                dm.append(sd[j][lab[0]])
        fm, dm = np.array(fm), np.array(dm)
        cuts = np.flatnonzero(np.diff(ds) > 0) + 1  # prefix lengths of open balls
        sizes = np.r_[cuts, space.n]
        radii = np.r_[ds[cuts] if not tight else ds[cuts - 1], ds[-1]]
        best = np.where(fm[:, None] >= sizes[None, :], dm[:, None], np.inf).min(axis=0)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(best == 0, 0.0, best / radii)
        guard = np.where(fm >= np.count_nonzero(ds == 0), dm, np.inf).min()
        ratio = np.r_[ratio, 0.0 if guard == 0 else np.inf]
        radii = np.r_[radii, 0.0]
        for i in np.argsort(-ratio, kind="stable")[:n_witnesses]:
            worst.append((float(ratio[i]), int(x), float(radii[i])))
    worst.sort(key=lambda w: (-w[0], w[1], w[2]))
    return (worst[0][0] if worst else 0.0), worst[:n_witnesses]


def build_adjacent_systems(
    space: QuasiMetricSpace,
    delta: float,
    K: int,
    c0: float = 1.0,
    C0: float = 1.0,
    seeds=None,
    C_target: float | None = None,
    backend: str = "metric",
) -> AdjacentSystems:
    """``K`` cube systems from independently seeded greedy orders, with verified covering.

    ``backend="euclidean"`` delegates to :func:`euclidean_shifted_grids`.
    Raises ``ValueError`` listing uncovered balls when ``C_target`` is given and
    not met.
    """
    if backend == "euclidean":
        adj = euclidean_shifted_grids(space)
    else:
        if 96 * space.A0**6 * delta > 1:
            raise ValueError(f"parameters violate 96*A0^6*delta <= 1 ({96 * space.A0**6 * delta:.6g} > 1)")
        seeds = list(range(K)) if seeds is None else list(seeds)
        if len(seeds) != K:
            raise ValueError("need one seed per system")
        systems = tuple(build_dyadic_system(space, delta, c0, C0, seed=s) for s in seeds)
        C, witnesses = covering_constant(space, systems)
        adj = AdjacentSystems(space, systems, C, tuple(witnesses))
    if C_target is not None and adj.C > C_target:
        listed = ", ".join(f"B(x{x}, {r:.4g}) ratio {q:.4g}" for q, x, r in adj.witnesses)
        raise ValueError(f"covering not achieved with K={adj.K}: C={adj.C:.6g} > {C_target:.6g}; worst balls: {listed}")
    return adj


@dataclass(frozen=True)
class CubeRef:
    t: int
    level: int
    cube: int
    diameter: float
    members: tuple


def family_radius(space: QuasiMetricSpace, x: int, r: float) -> float:
    """Largest radius of the point-pair family giving the same open ball as ``B(x, r)``."""
    ds = np.sort(space.dist[x])
    m = int(np.searchsorted(ds, r, side="left"))
    return float(ds[m]) if m < space.n else float(r)


def _candidates(adjacent: AdjacentSystems, x: int, r: float):
    space = adjacent.space
    ball = space.ball(x, r)
    if ball.size == 0:
        ball = np.array([x])
    for t, s in enumerate(adjacent.systems):
        for k in s.levels:
            lab = s.level_labels(k)
            a = lab[x]
            if np.all(lab[ball] == a):
                members = np.flatnonzero(lab == a)
                yield CubeRef(t, k, int(a), space.diameter(members), tuple(members.tolist()))


def _qualifies(c: CubeRef, adjacent: AdjacentSystems, r: float) -> bool:
    return c.diameter == 0 or c.diameter <= adjacent.C * r * (1 + 1e-12)


def cover_ball(adjacent: AdjacentSystems, x: int, r: float) -> CubeRef:
    """Smallest-diameter cube across systems containing ``B(x, r)`` with ``diam <= C r``."""
    good = [c for c in _candidates(adjacent, x, r) if _qualifies(c, adjacent, r)]
    if not good:
        raise ValueError(f"no cube covers B({x}, {r}) within C={adjacent.C}")
    return min(good, key=lambda c: (c.diameter, c.t, -c.level))


def route_ball(adjacent: AdjacentSystems, x: int, r: float) -> CubeRef:
    """Smallest-diameter qualifying cube in the lowest-numbered system that has one."""
    good = [c for c in _candidates(adjacent, x, r) if _qualifies(c, adjacent, r)]
    if not good:
        raise ValueError(f"no cube covers B({x}, {r}) within C={adjacent.C}")
    t = min(c.t for c in good)
    return min((c for c in good if c.t == t), key=lambda c: (c.diameter, -c.level))
