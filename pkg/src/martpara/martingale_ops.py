"""Martingale expansions, the maximal/square/conditional-square functions and paraproducts.

Every operation works on the *closed* filtration (see
:meth:`Filtration.closed`): the finest sigma-algebra of a finite space is the
full power set, so a terminal singleton level is appended when needed. This
makes ``f_{k_max} = f`` and the product identity exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .measure_space import Filtration, MeasureSpace, as_func


@dataclass(frozen=True, eq=False)
class MartingaleExpansion:
    """The martingale ``f_k = E_k f`` of a function along a filtration.

    ``values[j]`` is ``f_k`` at level ``k = k_min + j``. With
    ``zero_base`` the first row is replaced by zero, which is the
    ``f_0 = 0`` convention: the first difference is then ``E_{k_min+1} f``.
    """

    space: MeasureSpace
    filt: Filtration
    values: np.ndarray
    zero_base: bool

    @property
    def base(self) -> np.ndarray:
        return self.values[0]

    @property
    def diffs(self) -> np.ndarray:
        """Differences ``d_k f`` for ``k = k_min+1 .. k_max`` as rows."""
        return np.diff(self.values, axis=0)

    @property
    def levels(self) -> range:
        return self.filt.levels

    @property
    def function(self) -> np.ndarray:
        return self.values[-1]

    def at(self, k: int) -> np.ndarray:
        return self.values[k - self.filt.k_min]

    def diff(self, k: int) -> np.ndarray:
        """``d_k f`` for ``k_min < k <= k_max``."""
        j = k - self.filt.k_min
        if j < 1 or j >= len(self.values):
            raise ValueError(f"no difference at level {k}")
        return self.values[j] - self.values[j - 1]


def expand(space: MeasureSpace, filt: Filtration, f, zero_base: bool = True, close: bool = True) -> MartingaleExpansion:
    """Martingale expansion of ``f``; ``close`` appends a singleton level if needed."""
    f = as_func(space, f)
    if filt.n_points != space.n:
        raise ValueError(f"filtration covers {filt.n_points} points, space has {space.n}")
    if close:
        filt = filt.closed()
    rows = np.empty((filt.n_levels, space.n))
    for j, k in enumerate(filt.levels):
        rows[j] = filt.expectation(space, k, f)
    if zero_base:
        rows[0] = 0.0
    rows.setflags(write=False)
    return MartingaleExpansion(space, filt, rows, zero_base)


def maximal_function(exp: MartingaleExpansion) -> np.ndarray:
    """``f* = sup_k |f_k|`` including the base level."""
    return np.max(np.abs(exp.values), axis=0)


def square_function(exp: MartingaleExpansion) -> np.ndarray:
    """``S(f) = (sum_k |d_k f|^2)^{1/2}``."""
    d = exp.diffs
    if d.shape[0] == 0:
        return np.zeros(exp.space.n)
    return np.sqrt(np.sum(d * d, axis=0))


def predictable_squares(exp: MartingaleExpansion) -> np.ndarray:
    """Rows ``E_{k-1}|d_k f|^2`` for ``k = k_min+1 .. k_max``."""
    d = exp.diffs
    out = np.empty_like(d)
    for j in range(d.shape[0]):
        k = exp.filt.k_min + j
        out[j] = exp.filt.expectation(exp.space, k, d[j] * d[j])
    return out


def conditional_square_function(space: MeasureSpace, filt: Filtration, exp: MartingaleExpansion) -> np.ndarray:
    """``s(f) = (sum_k E_{k-1}|d_k f|^2)^{1/2}``.

    ``space`` and ``filt`` must be the ones the expansion was built on; the
    expansion already carries them (possibly closed), so they only serve as a
    consistency check.
    """
    if space is not exp.space and space.n != exp.space.n:
        raise ValueError("expansion belongs to a different space")
    if filt.n_points != exp.filt.n_points:
        raise ValueError("expansion belongs to a different filtration")
    c = predictable_squares(exp)
    if c.shape[0] == 0:
        return np.zeros(space.n)
    return np.sqrt(np.sum(c, axis=0))


def _diag(a: MartingaleExpansion, b: MartingaleExpansion) -> np.ndarray:
    da, db = a.diffs, b.diffs
    out = np.zeros(a.space.n)
    for j in range(da.shape[0]):
        out = out + da[j] * db[j]
    return out


def _low_high(low: MartingaleExpansion, high: MartingaleExpansion) -> np.ndarray:
    """``sum_k low_{k-1} d_k high`` accumulated in ascending level order."""
    dh = high.diffs
    out = np.zeros(low.space.n)
    for j in range(dh.shape[0]):
        out = out + low.values[j] * dh[j]
    return out


def paraproducts(space: MeasureSpace, filt: Filtration, f, g) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """The diagonal, low-high and high-low parts of ``f*g`` along ``filt``.

    Both expansions use a zero base, so ``f*g = pi1 + pi2 + pi3`` up to
    rounding. ``pi2(f, g)`` and ``pi3(g, f)`` are the same floating-point
    expression.
    """
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    if f.shape != g.shape:
        raise ValueError(f"dimension mismatch: f has shape {f.shape}, g has shape {g.shape}")
    ef = expand(space, filt, f, zero_base=True)
    eg = expand(space, filt, g, zero_base=True)
    return paraproducts_of(ef, eg)


def paraproducts_of(ef: MartingaleExpansion, eg: MartingaleExpansion) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if not (ef.zero_base and eg.zero_base):
        raise ValueError("paraproducts need zero-base expansions")
    if ef.values.shape != eg.values.shape:
        raise ValueError("expansions live on different filtrations")
    return _diag(ef, eg), _low_high(ef, eg), _low_high(eg, ef)


def bmo_levels(exp: MartingaleExpansion, shifted: bool) -> np.ndarray:
    """Per level ``||E_n |f - f_{n-1}|^2||_inf`` (``shifted``) or ``||E_n |f - f_n|^2||_inf``."""
    f = exp.function
    out = []
    start = 1 if shifted else 0
    for j in range(start, len(exp.values)):
        ref = exp.values[j - 1] if shifted else exp.values[j]
        r = f - ref
        k = exp.filt.k_min + j
        out.append(float(np.max(exp.filt.expectation(exp.space, k, r * r))))
    return np.array(out)


@dataclass(frozen=True)
class BmoMaximalReport:
    bmo: float
    maximal_mean: float
    maximal_bmo: float

    @property
    def mean_ratio(self) -> float:
        return self.maximal_mean / self.bmo

    @property
    def bmo_ratio(self) -> float:
        return self.maximal_bmo / self.bmo


def check_bmo_maximal(space: MeasureSpace, filt: Filtration, g) -> BmoMaximalReport:
    """Compare the maximal function of ``g`` with ``g`` in BMO, zero-base convention.

    Returns ``||g||_BMO``, the mean of ``g*`` and ``||g*||_BMO``; the two
    ratios of interest are properties of the report.
    """
    eg = expand(space, filt, g, zero_base=True)
    norm = float(np.sqrt(np.max(bmo_levels(eg, shifted=True), initial=0.0)))
    if norm == 0.0:
        raise ValueError("check_bmo_maximal: g has zero BMO norm")
    gstar = maximal_function(eg)
    es = expand(space, filt, gstar, zero_base=True)
    return BmoMaximalReport(
        bmo=norm,
        maximal_mean=space.integral(gstar) / space.total,
        maximal_bmo=float(np.sqrt(np.max(bmo_levels(es, shifted=True), initial=0.0))),
    )
