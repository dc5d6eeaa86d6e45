"""Norm calculators: Lebesgue, martingale Hardy, BMO/bmo, diagonal, Lipschitz and Luxembourg.

Conventions
-----------
Hardy-type norms (``Hp_S``, ``hp_s``, ``Hp_max``, ``h1_diag``) use the
zero-base convention ``f_{k_min} = 0`` by default, so the first difference
carries the mean. BMO, bmo and the Lipschitz norms default to the true
conditional expectations; pass ``zero_base=True`` for the other reading.

Event suprema
-------------
The Lipschitz functionals are suprema over all events of a level. For a
disjoint union ``A = A_1 u ... u A_m`` of atoms with
``I_i <= L^q P(A_i)^{1+q*alpha}``, superadditivity of ``t -> t^{1+q*alpha}``
gives ``sum I_i <= L^q P(A)^{1+q*alpha}``, and the sup-variant is a maximum
over the atoms; so single atoms attain the supremum. ``mode="unions"``
enumerates unions of up to ``max_union`` atoms as a cross-check.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar

from .martingale_ops import (
    bmo_levels,
    conditional_square_function,
    expand,
    maximal_function,
    predictable_squares,
    square_function,
)
from .measure_space import Filtration, MeasureSpace, ValidationReport, as_func


class NormVariant(str, Enum):
    Hp_S = "Hp_S"
    hp_s = "hp_s"
    Hp_max = "Hp_max"
    BMO = "BMO"
    bmo = "bmo"
    h1_diag = "h1_diag"
    Lambda_q = "Lambda_q"
    Lambda_sup = "Lambda_sup"
    Orlicz_Hardy = "Orlicz_Hardy"


def lp_norm(space: MeasureSpace, f, p: float) -> float:
    """``(sum w |f|^p)^{1/p}``; ``p = inf`` gives ``max |f|``."""
    if not p > 0:
        raise ValueError("p must be positive")
    a = np.abs(as_func(space, f))
    if math.isinf(p):
        return float(a.max())
    return float(np.sum(space.weights * a**p) ** (1.0 / p))


def hardy_norm(space: MeasureSpace, filt: Filtration, f, variant, p: float, zero_base: bool = True) -> float:
    variant = NormVariant(variant)
    exp = expand(space, filt, f, zero_base=zero_base)
    if variant is NormVariant.Hp_S:
        g = square_function(exp)
    elif variant is NormVariant.hp_s:
        g = conditional_square_function(space, filt, exp)
    elif variant is NormVariant.Hp_max:
        g = maximal_function(exp)
    else:
        raise ValueError(f"{variant.value} is not a Hardy variant")
    return lp_norm(space, g, p)


def bmo_norm(space: MeasureSpace, filt: Filtration, g, variant="BMO", zero_base: bool = False) -> float:
    """``BMO``: sup over n >= k_min+1 of ``||E_n|g - g_{n-1}|^2||_inf^{1/2}``;
    ``bmo``: sup over n >= k_min of ``||E_n|g - g_n|^2||_inf^{1/2}``."""
    variant = NormVariant(variant)
    if variant not in (NormVariant.BMO, NormVariant.bmo):
        raise ValueError(f"{variant.value} is not a BMO variant")
    exp = expand(space, filt, g, zero_base=zero_base)
    vals = bmo_levels(exp, shifted=variant is NormVariant.BMO)
    return float(np.sqrt(np.max(vals, initial=0.0)))


def max_difference_norm(space: MeasureSpace, filt: Filtration, g, zero_base: bool = False) -> float:
    """``sup_k ||d_k g||_inf``."""
    d = expand(space, filt, g, zero_base=zero_base).diffs
    return float(np.max(np.abs(d), initial=0.0))


def diagonal_norm(space: MeasureSpace, filt: Filtration, f, zero_base: bool = True) -> float:
    """``sum_k ||d_k f||_1``."""
    d = expand(space, filt, f, zero_base=zero_base).diffs
    return float(sum(np.sum(space.weights * np.abs(row)) for row in d))


def _alpha(p: float) -> float:
    if not 0 < p < 1:
        raise ValueError("Lipschitz norms need p in (0, 1)")
    return 1.0 / p - 1.0


def _level_residuals(space, filt, g, zero_base):
    exp = expand(space, filt, g, zero_base=zero_base)
    f = exp.function
    for j, k in enumerate(exp.filt.levels):
        yield exp.filt.index(k), np.abs(f - exp.values[j])


def lipschitz_norm(
    space: MeasureSpace,
    filt: Filtration,
    g,
    p: float,
    q: int = 1,
    zero_base: bool = False,
    mode: str = "atoms",
    max_union: int = 4,
) -> float:
    """``sup_n sup_{A in F_n} mu(A)^{-1/q - alpha} (int_A |g - g_n|^q)^{1/q}`` with ``alpha = 1/p - 1``."""
    alpha = _alpha(p)
    if q not in (1, 2):
        raise ValueError("q must be 1 or 2")
    expo = -1.0 / q - alpha
    best = 0.0
    for idx, r in _level_residuals(space, filt, g, zero_base):
        mass = idx.block_sums(space.weights)
        mom = idx.block_sums(space.weights * r**q)
        if mode == "atoms":
            best = max(best, float(np.max(mass**expo * mom ** (1.0 / q))))
        elif mode == "unions":
            for size in range(1, min(max_union, idx.n_blocks) + 1):
                for combo in itertools.combinations(range(idx.n_blocks), size):
                    c = list(combo)
                    m, s = float(np.sum(mass[c])), float(np.sum(mom[c]))
                    best = max(best, m**expo * s ** (1.0 / q))
        else:
            raise ValueError(f"unknown mode {mode!r}")
    return best


def lipschitz_sup_norm(space: MeasureSpace, filt: Filtration, g, p: float, zero_base: bool = False) -> float:
    """``sup_n sup_{A in F_n} mu(A)^{-alpha} ||1_A |g - g_n|||_inf``."""
    alpha = _alpha(p)
    best = 0.0
    for idx, r in _level_residuals(space, filt, g, zero_base):
        mass = idx.block_sums(space.weights)
        peak = np.maximum.reduceat(r[idx.perm], idx.starts)
        best = max(best, float(np.max(mass**-alpha * peak)))
    return best


# ---------------------------------------------------------------------------
# Orlicz and Musielak-Orlicz functions


@dataclass(frozen=True)
class MusielakFunction:
    """``Psi(x, t)`` evaluated on a vector ``t`` whose i-th entry belongs to point i."""

    evaluator: Callable[[np.ndarray], np.ndarray]
    name: str = "psi"

    def __call__(self, t) -> np.ndarray:
        return self.evaluator(np.asarray(t, dtype=float))

    def check(self, n: int, grid=None) -> ValidationReport:
        """Spot-check Orlicz properties of ``Psi(x, .)`` at every point."""
        report = ValidationReport()
        grid = np.geomspace(1e-6, 1e6, 61) if grid is None else np.asarray(grid)
        at_zero = self(np.zeros(n))
        if np.any(at_zero != 0):
            report.violations.append("Psi(x, 0) != 0")
        prev = at_zero
        for t in grid:
            cur = self(np.full(n, t))
            if np.any(cur <= 0):
                report.violations.append(f"Psi(x, {t:g}) not positive")
            if np.any(cur < prev):
                report.violations.append(f"Psi(x, .) decreases before t = {t:g}")
            prev = cur
        if np.any(self(np.full(n, 1e12)) < 1e3):
            report.violations.append("Psi(x, .) looks bounded")
        return report


@dataclass(frozen=True)
class OrliczFunction(MusielakFunction):
    """Point-independent growth function with declared lower type."""

    lower_type: float = 1.0
    upper_type: float = 1.0


def phi(t):
    """``t / log(e + t)``."""
    t = np.asarray(t, dtype=float)
    return t / np.log(math.e + t)


PHI = OrliczFunction(phi, "phi", lower_type=1.0, upper_type=1.0)


def luxembourg_norm(space: MeasureSpace, psi: Callable, f, rtol: float = 1e-12) -> float:
    """``inf{lam > 0 : sum w Psi(x, |f|/lam) <= 1}``.

    Starting from ``lam0 = ||f||_1 + ||f||_inf`` the bracket is grown or shrunk
    by factors of two, then bisected to relative width ``rtol``.
    """
    a = np.abs(as_func(space, f))
    if not np.any(a):
        return 0.0
    w = space.weights

    def excess(lam: float) -> float:
        return float(np.sum(w * psi(a / lam))) - 1.0

    lam = float(np.sum(w * a) + a.max())
    if excess(lam) > 0:
        lo, hi = lam, 2 * lam
        while excess(hi) > 0:
            lo, hi = hi, 2 * hi
            if not math.isfinite(hi):
                raise ArithmeticError("luxembourg_norm: failed to bracket the norm")
    else:
        lo, hi = lam / 2, lam
        while excess(lo) <= 0:
            lo, hi = lo / 2, lo
            if lo == 0.0:
                raise ArithmeticError("luxembourg_norm: integrand stays below 1; Psi is bounded?")
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0:
            lo = mid
        else:
            hi = mid
    return hi


def orlicz_hardy_norm(space: MeasureSpace, filt: Filtration, f, psi: Callable = PHI, zero_base: bool = True) -> float:
    """Luxembourg norm of the square function."""
    return luxembourg_norm(space, psi, square_function(expand(space, filt, f, zero_base=zero_base)))


# ---------------------------------------------------------------------------
# sum space h^1 + h^1_d


@dataclass(frozen=True, eq=False)
class SumSplit:
    """Exhibited split ``f = g + h`` with its two norms."""

    g: np.ndarray
    h: np.ndarray
    g_norm: float
    h_norm: float

    @property
    def total(self) -> float:
        return self.g_norm + self.h_norm


def sum_norm_upper(
    space: MeasureSpace,
    filt: Filtration,
    f,
    strategy: str = "coordinate_descent",
    max_sweeps: int = 20,
) -> tuple[float, SumSplit]:
    """Upper bound of ``inf ||g||_{h^1} + ||h||_{h^1_d}`` over splits ``f = g + h``.

    Splits are parametrized by a weight ``theta in [0, 1]`` per difference level
    and parent block: ``d_k h = theta d_k f`` and ``d_k g = (1 - theta) d_k f``
    on that block, which keeps both pieces martingales. The objective is convex
    in ``theta`` and coordinate descent starts from the better trivial split,
    so the result never exceeds either trivial split.
    """
    exp = expand(space, filt, f, zero_base=True)
    d = exp.diffs
    nd = d.shape[0]
    w = space.weights
    if nd == 0:
        z = np.zeros(space.n)
        return 0.0, SumSplit(z, z, 0.0, 0.0)
    c = predictable_squares(exp)
    parents = [exp.filt.index(exp.filt.k_min + j) for j in range(nd)]
    absmass = [idx.block_sums(w * np.abs(d[j])) for j, idx in enumerate(parents)]

    def objective(theta):
        s2 = sum((1 - theta[j][parents[j].labels]) ** 2 * c[j] for j in range(nd))
        return float(np.sum(w * np.sqrt(s2))) + float(sum(np.dot(theta[j], absmass[j]) for j in range(nd)))

    zeros = [np.zeros(idx.n_blocks) for idx in parents]
    ones = [np.ones(idx.n_blocks) for idx in parents]
    left, right = objective(zeros), objective(ones)
    if strategy == "trivial_left":
        theta = zeros
    elif strategy == "trivial_right":
        theta = ones
    elif strategy == "coordinate_descent":
        theta = [t.copy() for t in (zeros if left <= right else ones)]
        current = min(left, right)
        for _ in range(max_sweeps):
            before = current
            for j in range(nd):
                idx = parents[j]
                rest = sum((1 - theta[i][parents[i].labels]) ** 2 * c[i] for i in range(nd) if i != j)
                rest = rest if nd > 1 else np.zeros(space.n)
                for b, members in enumerate(idx.blocks()):
                    if c[j][members].max() == 0 and absmass[j][b] == 0:
                        continue
                    wb, rb, cb, ab = w[members], rest[members], c[j][members], absmass[j][b]

                    def local(t, wb=wb, rb=rb, cb=cb, ab=ab):
                        return float(np.sum(wb * np.sqrt(rb + (1 - t) ** 2 * cb))) + t * ab

                    cand = [(local(theta[j][b]), theta[j][b]), (local(0.0), 0.0), (local(1.0), 1.0)]
                    res = minimize_scalar(local, bounds=(0.0, 1.0), method="bounded", options={"xatol": 1e-10})
                    cand.append((float(res.fun), float(res.x)))
                    theta[j][b] = min(cand)[1]
            current = objective(theta)
            if before - current <= 1e-13 * max(1.0, before):
                break
    else:
        raise ValueError(f"unknown split strategy {strategy!r}")
    th = [theta[j][parents[j].labels] for j in range(nd)]
    g = sum((1 - th[j]) * d[j] for j in range(nd))
    h = sum(th[j] * d[j] for j in range(nd))
    s = np.sqrt(sum((1 - th[j]) ** 2 * c[j] for j in range(nd)))
    g_norm = float(np.sum(w * s))
    h_norm = float(sum(np.sum(w * np.abs(th[j] * d[j])) for j in range(nd)))
    return g_norm + h_norm, SumSplit(np.asarray(g), np.asarray(h), g_norm, h_norm)


def norm(space: MeasureSpace, filt: Filtration, f, variant, p: float = 1.0, q: int = 1) -> float:
    """Dispatch on a :class:`NormVariant` tag."""
    variant = NormVariant(variant)
    if variant in (NormVariant.Hp_S, NormVariant.hp_s, NormVariant.Hp_max):
        return hardy_norm(space, filt, f, variant, p)
    if variant in (NormVariant.BMO, NormVariant.bmo):
        return bmo_norm(space, filt, f, variant)
    if variant is NormVariant.h1_diag:
        return diagonal_norm(space, filt, f)
    if variant is NormVariant.Lambda_q:
        return lipschitz_norm(space, filt, f, p, q)
    if variant is NormVariant.Lambda_sup:
        return lipschitz_sup_norm(space, filt, f, p)
    return orlicz_hardy_norm(space, filt, f)
