"""Ball-based analysis on finite spaces of homogeneous type.

Ball suprema run over the point-pair family ``B(x_i, d(x_i, x_j))`` plus the
whole space: on a finite set every open ball equals one of these as a point
set. ``mu(B(O, d(x, O)))`` uses the open ball, so it vanishes at ``x = O``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .atomic import SimpleAtom, _inv, _qnorm, stopping_time_decomposition
from .dyadic_geometry import (
    AdjacentSystems,
    DyadicSystem,
    QuasiMetricSpace,
    cover_ball,
    family_radius,
    route_ball,
    system_to_filtration,
)
from .function_norms import MusielakFunction, luxembourg_norm
from .martingale_ops import paraproducts
from .measure_space import Filtration, MeasureSpace


def _prefix_balls(space: QuasiMetricSpace, x: int):
    """Points sorted by distance from ``x`` and the prefix sizes of all distinct open balls."""
    order = np.argsort(space.dist[x], kind="stable")
    ds = space.dist[x][order]
    sizes = np.r_[np.flatnonzero(np.diff(ds) > 0) + 1, space.n]
    return order, ds, sizes


def ball_norm(space: QuasiMetricSpace, f, kind: str = "BMO_mu", alpha: float = 0.0) -> float:
    """``BMO_mu``: sup of ``mu(B)^-1 int_B |f - f_B|``; ``Lip_alpha``: sup of ``osc(f, B) / mu(B)^alpha``."""
    f = np.asarray(f, dtype=float)
    if f.shape != (space.n,):
        raise ValueError(f"function has shape {f.shape}, space has {space.n} points")
    w = space.weights
    best = 0.0
    for x in range(space.n):
        order, _, sizes = _prefix_balls(space, x)
        F, W = f[order], w[order]
        mass = np.cumsum(W)[sizes - 1]
        if kind == "BMO_mu":
            mean = np.cumsum(W * F)[sizes - 1] / mass
            inside = np.arange(space.n)[None, :] < sizes[:, None]
            dev = np.where(inside, W[None, :] * np.abs(F[None, :] - mean[:, None]), 0.0)
            best = max(best, float(np.max(dev.sum(axis=1) / mass)))
        elif kind == "Lip_alpha":
            osc = (np.maximum.accumulate(F) - np.minimum.accumulate(F))[sizes - 1]
            best = max(best, float(np.max(osc / mass**alpha)))
        else:
            raise ValueError(f"unknown ball norm {kind!r}")
    return best


def cube_oscillation(space: MeasureSpace, filt: Filtration, g, q: int = 1, alpha: float = 0.0) -> float:
    """``sup_Q mu(Q)^{-1/q - alpha} (int_Q |g - g_Q|^q)^{1/q}`` over every block of every level.

    ``q = 1, alpha = 0`` is the dyadic mean oscillation; ``alpha = 1/p - 1``
    gives the dyadic Lipschitz norms.
    """
    g = np.asarray(g, dtype=float)
    w = space.weights
    best = 0.0
    for k in filt.levels:
        idx = filt.index(k)
        mass = idx.block_sums(w)
        mean = idx.block_sums(w * g) / mass
        r = np.abs(g - mean[idx.labels]) ** q
        mom = idx.block_sums(w * r)
        best = max(best, float(np.max(mass ** (-1.0 / q - alpha) * mom ** (1.0 / q))))
    return best


def _alpha(p: float) -> float:
    if not 0 < p <= 1:
        raise ValueError("p must lie in (0, 1]")
    return 1.0 / p - 1.0


def origin_ball_measure(space: QuasiMetricSpace, O: int, radii) -> np.ndarray:
    """``mu(B(O, r))`` (open balls) for each radius."""
    order = np.argsort(space.dist[O], kind="stable")
    ds = space.dist[O][order]
    cum = np.r_[0.0, np.cumsum(space.weights[order])]
    return cum[np.searchsorted(ds, np.asarray(radii, dtype=float), side="left")]


def psi_value(space: QuasiMetricSpace, O: int, p: float, x: int, t: float) -> float:
    """``Psi_1(x, t) = t / (log(e + d(x, O)) + log(e + t))`` and, for ``p < 1``,
    ``Psi_p(x, t) = t / (1 + (t (1 + mu(B(O, d(x, O)))))^{1-p})``."""
    d = float(space.dist[x, O])
    if p == 1:
        return t / (math.log(math.e + d) + math.log(math.e + t))
    m = float(origin_ball_measure(space, O, [d])[0])
    return t / (1.0 + (t * (1.0 + m)) ** (1.0 - p))


def musielak_psi(space: QuasiMetricSpace, O: int, p: float) -> MusielakFunction:
    """``Psi_p(x, .)`` at every point, as a vectorized growth function."""
    _alpha(p)
    d = space.dist[:, O].copy()
    if p == 1:
        log_d = np.log(math.e + d)
        return MusielakFunction(lambda t: t / (log_d + np.log(math.e + t)), "Psi_1")
    m = origin_ball_measure(space, O, d)
    return MusielakFunction(lambda t: t / (1.0 + (t * (1.0 + m)) ** (1.0 - p)), f"Psi_{p:g}")


@dataclass(frozen=True, eq=False)
class BasePointContext:
    """Base point ``O`` of a space and the derived level-zero data."""

    space: QuasiMetricSpace
    O: int

    def __post_init__(self):
        if not 0 <= self.O < self.space.n:
            raise ValueError(f"base point {self.O} outside the space")

    @property
    def B1(self) -> np.ndarray:
        return self.space.ball(self.O, 1.0)

    def q0(self, system: DyadicSystem) -> int:
        """Index of the level-0 cube containing ``O``."""
        if 0 not in system.levels:
            raise ValueError(f"dyadic system has no level 0 (levels {system.k_min}..{system.k_max})")
        return int(system.level_labels(0)[self.O])

    def level0(self, system: DyadicSystem):
        """``(labels, centers, q0)`` of the level-0 partition."""
        q0 = self.q0(system)
        return system.level_labels(0), system.level_centers(0), q0


def _level0_means(space: QuasiMetricSpace, system: DyadicSystem, ctx: BasePointContext, g):
    labels, centers, q0 = ctx.level0(system)
    w = space.weights
    mass = np.bincount(labels, weights=w)
    means = np.bincount(labels, weights=w * g) / mass
    return means, centers, q0


def plus_norm(space: QuasiMetricSpace, system: DyadicSystem, ctx: BasePointContext, g, kind: str, p: float = 1.0) -> float:
    """``BMO_plus``, ``Lip_plus`` or ``BMO_psi`` of ``g`` relative to one dyadic system.

    * ``BMO_plus``: ``sup_a |g_{Q_a} - g_{Q0}| / log(e + d(z_a, O)) + |g_{Q0}| + ||g||_{BMO^D}``;
    * ``Lip_plus``: ``sup_a |g_{Q_a} - g_{Q0}| / (1 + mu(B(O, d(z_a, O)))^alpha) + |g_{Q0}| + ||g||_{Lambda_1^D}``;
    * ``BMO_psi``: ``sup_Q ||1_Q||_{L^Psi_p}^-1 int_Q |g - g_Q|``.
    """
    g = np.asarray(g, dtype=float)
    ms, filt = system_to_filtration(system)
    if kind == "BMO_psi":
        psi = musielak_psi(space, ctx.O, p)
        best = 0.0
        for k in filt.levels:
            idx = filt.index(k)
            mean = idx.block_sums(ms.weights * g) / idx.block_sums(ms.weights)
            mom = idx.block_sums(ms.weights * np.abs(g - mean[idx.labels]))
            for b, members in enumerate(idx.blocks()):
                if mom[b] > 0:
                    ind = np.zeros(space.n)
                    ind[members] = 1.0
                    best = max(best, float(mom[b]) / luxembourg_norm(ms, psi, ind))
        return best
    means, centers, q0 = _level0_means(space, system, ctx, g)
    dz = space.dist[centers, ctx.O]
    gap = np.abs(means - means[q0])
    if kind == "BMO_plus":
        scale = np.log(math.e + dz)
        osc = cube_oscillation(ms, filt, g, 1, 0.0)
    elif kind == "Lip_plus":
        alpha = _alpha(p)
        scale = 1.0 + origin_ball_measure(space, ctx.O, dz) ** alpha
        osc = cube_oscillation(ms, filt, g, 1, alpha)
    else:
        raise ValueError(f"unknown plus norm {kind!r}")
    return float(np.max(gap / scale)) + abs(float(means[q0])) + osc


def ball_plus_norm(space: QuasiMetricSpace, ctx: BasePointContext, g, p: float = 1.0) -> float:
    """``|g_{B_1}| + ||g||_{BMO}`` for ``p = 1``, ``|g_{B_1}| + ||g||_{Lip_alpha}`` otherwise."""
    g = np.asarray(g, dtype=float)
    b1 = ctx.B1
    w = space.weights
    mean = float(np.sum(w[b1] * g[b1]) / np.sum(w[b1]))
    if p == 1:
        return abs(mean) + ball_norm(space, g, "BMO_mu")
    return abs(mean) + ball_norm(space, g, "Lip_alpha", _alpha(p))


# ---------------------------------------------------------------------------
# atoms


@dataclass(frozen=True, eq=False)
class BallAtom:
    """Function supported in the open ball ``B(center, radius)``."""

    values: np.ndarray
    center: int
    radius: float
    p: float = 1.0
    q: float = math.inf

    def support(self, space: QuasiMetricSpace) -> np.ndarray:
        return space.ball(self.center, self.radius)


@dataclass(frozen=True)
class BallAtomReport:
    mean_defect: float
    support_defect: float
    size_ratio: float

    @property
    def ok(self) -> bool:
        return self.mean_defect <= 1e-12 and self.support_defect == 0.0 and self.size_ratio <= 1.0 + 1e-12

    def failures(self) -> list[str]:
        out = []
        if self.mean_defect > 1e-12:
            out.append(f"mean-zero condition off by {self.mean_defect:.3g}")
        if self.support_defect:
            out.append(f"mass {self.support_defect:.3g} outside the region")
        if self.size_ratio > 1.0 + 1e-12:
            out.append(f"size condition exceeded by factor {self.size_ratio:.6g}")
        return out


def _region_checks(space: QuasiMetricSpace, a: np.ndarray, members: np.ndarray):
    inside = np.zeros(space.n, dtype=bool)
    inside[members] = True
    support_defect = float(np.max(np.abs(a[~inside]), initial=0.0))
    w = space.weights
    mass = float(np.sum(w[inside]))
    mean_defect = abs(float(np.sum(w * a))) / mass / max(1.0, float(np.max(np.abs(a))))
    return mean_defect, support_defect, mass


def validate_ball_atom(space: QuasiMetricSpace, atom: BallAtom) -> BallAtomReport:
    """Support in the ball, mean zero, and ``||a||_q <= mu(B)^{1/q - 1/p}``."""
    a = np.asarray(atom.values, dtype=float)
    mean_defect, support_defect, mass = _region_checks(space, a, atom.support(space))
    size_ratio = _qnorm(space.weights, a, atom.q) / mass ** (_inv(atom.q) - 1.0 / atom.p)
    return BallAtomReport(mean_defect, support_defect, size_ratio)


@dataclass(frozen=True, eq=False)
class PsiAtom:
    """Function supported in a ball or cube with sup norm bounded by the region's Luxembourg norm."""

    values: np.ndarray
    region: tuple
    p: float
    kind: str = "ball"


def indicator_norm(space: QuasiMetricSpace, O: int, p: float, members) -> float:
    """``||1_E||_{L^Psi_p}``."""
    ind = np.zeros(space.n)
    ind[np.asarray(members, dtype=int)] = 1.0
    return luxembourg_norm(space.measure_space(), musielak_psi(space, O, p), ind)


def validate_psi_atom(space: QuasiMetricSpace, O: int, atom: PsiAtom) -> BallAtomReport:
    """Support, mean zero and ``||a||_inf <= ||1_region||_{L^Psi_p}^-1``."""
    a = np.asarray(atom.values, dtype=float)
    members = np.asarray(atom.region, dtype=int)
    mean_defect, support_defect, _ = _region_checks(space, a, members)
    size_ratio = float(np.max(np.abs(a))) * indicator_norm(space, O, atom.p, members)
    return BallAtomReport(mean_defect, support_defect, size_ratio)


def ball_atom_to_dyadic(space: QuasiMetricSpace, adjacent: AdjacentSystems, atom: BallAtom):
    """Rewrite a ball atom as ``c`` times a simple atom on a covering cube.

    With ``B`` inside the cube ``Q`` the scalar ``c = (mu(Q)/mu(B))^{1/p - 1/q}``
    turns the ball size bound into the cube size bound; ``c <= (mu(Q)/mu(B))^{1/p}``.
    """
    cube = cover_ball(adjacent, atom.center, atom.radius)
    ball = atom.support(space)
    w = space.weights
    ratio = float(np.sum(w[list(cube.members)])) / float(np.sum(w[ball]))
    c = ratio ** (1.0 / atom.p - _inv(atom.q))
    simple = SimpleAtom(np.asarray(atom.values, dtype=float) / c, cube.level, cube.members, atom.p, atom.q)
    return cube.t, simple, c


def dyadic_atom_to_ball(space: QuasiMetricSpace, system: DyadicSystem, atom: SimpleAtom):
    """Rewrite a mean-zero cube atom as ``c`` times a ball atom.

    The ball is the outer sandwich ball ``B(z, C1 delta^k)`` for metric
    constructions and the smallest center ball holding the cube for grids;
    the radius is then widened to the point-pair family radius with the same
    point set. ``c = (mu(B)/mu(Q))^{1/p - 1/q}``.
    """
    a = np.asarray(atom.values, dtype=float)
    members = np.asarray(atom.block, dtype=int)
    if abs(float(np.sum(space.weights * a))) > 1e-12 * max(1.0, float(np.sum(space.weights * np.abs(a)))):
        raise ValueError("dyadic_atom_to_ball: atom does not have mean zero")
    z = int(system.level_centers(atom.level)[system.level_labels(atom.level)[members[0]]])
    if system.C1 is not None:
        r = system.C1 * system.delta**atom.level
    else:
        r = float(np.max(space.dist[z, members]))
        r = np.nextafter(r, np.inf) if r > 0 else np.nextafter(0.0, 1.0)
    r = family_radius(space, z, r)
    ball = space.ball(z, r)
    w = space.weights
    ratio = float(np.sum(w[ball])) / float(np.sum(w[members]))
    c = ratio ** (1.0 / atom.p - _inv(atom.q))
    return BallAtom(a / c, z, r, atom.p, atom.q), c


# ---------------------------------------------------------------------------
# multipliers


def decay_profile(space: QuasiMetricSpace, O: int, p: float) -> np.ndarray:
    """``1 / ((1 + mu(B(O, d(x, O)))^alpha) log(e + d(x, O)))``."""
    alpha = _alpha(p)
    d = space.dist[:, O]
    return 1.0 / ((1.0 + origin_ball_measure(space, O, d) ** alpha) * np.log(math.e + d))


def multiplier_check(space: QuasiMetricSpace, ctx: BasePointContext, h, p: float) -> tuple[float, float]:
    """Smallest constants in the decay and oscillation conditions of the test-function class.

    The oscillation bound ``mu(B)^alpha / ((1 + mu(B(O, 1 + r + d(c, O)))^alpha) log(e + r + d(c, O)))``
    decreases in ``r``, so for each point set the largest admissible radius
    (capped at ``d(c, O)/(2 A0) + 1``) gives the exact supremum.
    """
    h = np.asarray(h, dtype=float)
    alpha = _alpha(p)
    O = ctx.O
    decay = float(np.max(np.abs(h) / decay_profile(space, O, p)))
    w = space.weights
    osc_best = 0.0
    for c in range(space.n):
        order, ds, sizes = _prefix_balls(space, c)
        dc = float(space.dist[c, O])
        cap = dc / (2 * space.A0) + 1.0
        lower = ds[sizes - 1]  # the prefix is the ball for radii in (lower, upper]
        upper = np.r_[ds[sizes[:-1]], np.inf]
        ok = lower < cap
        r = np.minimum(upper, cap)[ok]
        sz = sizes[ok]
        H = h[order]
        osc = (np.maximum.accumulate(H) - np.minimum.accumulate(H))[sz - 1]
        mass = np.cumsum(w[order])[sz - 1]
        bound = mass**alpha / ((1.0 + origin_ball_measure(space, O, 1.0 + r + dc) ** alpha) * np.log(math.e + r + dc))
        osc_best = max(osc_best, float(np.max(osc / bound, initial=0.0)))
    return decay, osc_best


def multiplier_inequality(space: QuasiMetricSpace, system: DyadicSystem, ctx: BasePointContext, g, h, p: float = 1.0) -> float:
    """``||g h||_+ / (||g||_+ (||h||_inf + 1))`` with ``BMO_plus`` at ``p = 1`` and ``Lip_plus`` below."""
    kind = "BMO_plus" if p == 1 else "Lip_plus"
    g = np.asarray(g, dtype=float)
    h = np.asarray(h, dtype=float)
    den = plus_norm(space, system, ctx, g, kind, p)
    if den == 0:
        raise ValueError("multiplier_inequality: g has zero norm")
    return plus_norm(space, system, ctx, g * h, kind, p) / (den * (float(np.max(np.abs(h))) + 1.0))


# ---------------------------------------------------------------------------
# products across adjacent systems


@dataclass(frozen=True, eq=False)
class PiF:
    """The three operators applied to ``g`` and the per-system split of ``f``."""

    pi1: np.ndarray
    pi2: np.ndarray
    pi3: np.ndarray
    parts: tuple
    routes: tuple

    def __iter__(self):
        return iter((self.pi1, self.pi2, self.pi3))


def ball_decomposition(space: QuasiMetricSpace, adjacent: AdjacentSystems, f, p: float = 1.0, q: float = math.inf):
    """Ball atoms of a mean-zero ``f``: dyadic atoms of the first system moved to balls.

    Returns ``[(lambda, BallAtom)]`` with ``f = sum lambda a``.
    """
    f = np.asarray(f, dtype=float)
    w = space.weights
    if abs(float(np.sum(w * f))) > 1e-12 * max(1.0, float(np.sum(w * np.abs(f)))):
        raise ValueError("ball_decomposition: f must have mean zero")
    system = adjacent.systems[0]
    ms, filt = system_to_filtration(system)
    dec = stopping_time_decomposition(ms, filt, f, p, q, detect_single=False)
    scale = float(np.sum(w * np.abs(f)))
    out = []
    for lam, atom in dec.terms:
        if abs(lam * float(np.sum(w * atom.values))) <= 1e-13 * scale:
            # rounding residue of the mean: the level carrying it is constant
            if abs(lam) * float(np.sum(w * np.abs(atom.values))) <= 1e-13 * scale:
                continue
        ball, c = dyadic_atom_to_ball(space, system, atom)
        out.append((lam * c, ball))
    return out


def pi_f_operators(space: QuasiMetricSpace, adjacent: AdjacentSystems, f, g, p: float = 1.0) -> PiF:
    """``Pi_i^f(g) = sum_t Pi_i(f^t, g)`` with ``f = sum_t f^t`` split by ball-atom routing.

    ``f`` is either a function (decomposed by :func:`ball_decomposition`) or a
    list of ``(lambda, BallAtom)`` terms. Each atom goes to the lowest-numbered
    system with a qualifying covering cube; ``Pi_i(f^t, g)`` is computed on
    that system's filtration.
    """
    g = np.asarray(g, dtype=float)
    if g.shape != (space.n,):
        raise ValueError(f"dimension mismatch: g has shape {g.shape}, space has {space.n} points")
    if isinstance(f, (list, tuple)):
        terms = list(f)
    else:
        f = np.asarray(f, dtype=float)
        if f.shape != (space.n,):
            raise ValueError(f"dimension mismatch: f has shape {f.shape}, space has {space.n} points")
        terms = ball_decomposition(space, adjacent, f, p)
    parts = [np.zeros(space.n) for _ in range(adjacent.K)]
    routes = []
    for lam, atom in terms:
        t = route_ball(adjacent, atom.center, atom.radius).t
        parts[t] = parts[t] + lam * np.asarray(atom.values, dtype=float)
        routes.append(t)
    pis = [np.zeros(space.n) for _ in range(3)]
    for t, part in enumerate(parts):
        if not np.any(part):
            continue
        ms, filt = system_to_filtration(adjacent.systems[t])
        for i, piece in enumerate(paraproducts(ms, filt, part, g)):
            pis[i] = pis[i] + piece
    return PiF(pis[0], pis[1], pis[2], tuple(parts), tuple(routes))


# ---------------------------------------------------------------------------
# growth of the Psi_p weight over dilated balls


@dataclass(frozen=True)
class GrowthReport:
    lhs: float
    rhs: float
    scale: float


def ball_integral_growth_check(space: QuasiMetricSpace, O: int, p: float, center: int, radius: float, D: float) -> GrowthReport:
    """Integral of ``u = 1/(1 + (1 + mu(B(O, d(x, O))))^{1-p})`` over ``B`` and ``DB``.

    The measure is rescaled to ``c mu`` (which also rescales ``mu(B(O, .))``)
    so that the integral over ``B`` equals one; the integral over the dilated
    ball under the same measure is returned as ``rhs``.
    """
    if not 0 < p < 1:
        raise ValueError("growth check needs p in (0, 1)")
    if D < 1:
        raise ValueError("dilation factor must be at least 1")
    m = origin_ball_measure(space, O, space.dist[:, O])
    w = space.weights
    inner = space.dist[center] < radius
    outer = space.dist[center] < D * radius
    if not inner.any():
        raise ValueError("growth check: empty ball")

    def integral(c: float, mask) -> float:
        return float(np.sum(c * w[mask] / (1.0 + (1.0 + c * m[mask]) ** (1.0 - p))))

    hi = 1.0
    while integral(hi, inner) < 1.0:
        hi *= 2.0
        if hi > 1e300:
            raise ValueError("growth check: normalization not found")
    lo = hi / 2.0
    while integral(lo, inner) > 1.0:
        lo /= 2.0
        if lo < 1e-300:
            raise ValueError("growth check: normalization not found")
    c = brentq(lambda s: integral(s, inner) - 1.0, lo, hi, xtol=1e-300, rtol=1e-14)
    return GrowthReport(integral(c, inner), integral(c, outer), c)


def psi1_weight(space: QuasiMetricSpace, O: int, C_mu: float) -> np.ndarray:
    """``w(x) = (e + d(x, O))^{-(C_mu + 1)}``, the weight dominating ``Psi_1``."""
    return (math.e + space.dist[:, O]) ** -(C_mu + 1.0)


def weight_bound_ratio(space: QuasiMetricSpace, O: int, C_mu: float) -> float:
    """``max w(x) / min(1, d(x, O)^{-(C_mu + 1)})``; at most one."""
    d = space.dist[:, O]
    with np.errstate(divide="ignore"):
        cap = np.minimum(1.0, np.where(d > 0, d, 0.0) ** -(C_mu + 1.0))
    return float(np.max(psi1_weight(space, O, C_mu) / cap))
