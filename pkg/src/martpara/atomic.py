"""Simple atoms and a constructive stopping-time atomic decomposition.

Decomposition outline (all on the closed filtration with zero base):

* ``s_{n+1}(f)^2 = sum_{k <= n+1} E_{k-1}|d_k f|^2`` is ``F_n``-measurable;
* ``nu_j`` is the first level ``n`` with ``s_{n+1}(f) > 2^j`` (or never);
* ``b^j = f^{nu_{j+1}} - f^{nu_j}`` collects the differences ``d_k f`` with
  ``nu_j < k <= nu_{j+1}``;
* ``b^j`` is cut along the atoms ``A`` of level ``n`` inside ``{nu_j = n}``;
  every piece ``1_A b^j`` has vanishing ``E_n`` and is supported in ``A``;
* each piece is divided by ``lambda = ||1_A b^j||_q P(A)^{1/p - 1/q}``, which
  makes its ``L^q`` size exactly the atom bound.

For ``q = 2`` this gives ``lambda <= 2^{j+1} P(A)^{1/p}`` and hence
``(sum |lambda|^p)^{1/p} <= (2^p / (1 - 2^{-p}))^{1/p} ||s(f)||_p``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .martingale_ops import expand, predictable_squares
from .measure_space import Filtration, MeasureSpace, as_func


def _inv(q: float) -> float:
    return 0.0 if math.isinf(q) else 1.0 / q


def _qnorm(w: np.ndarray, a: np.ndarray, q: float) -> float:
    if math.isinf(q):
        return float(np.max(np.abs(a), initial=0.0))
    return float(np.sum(w * np.abs(a) ** q) ** (1.0 / q))


def _check_exponents(p: float, q: float):
    if not 0 < p <= 1:
        raise ValueError("atoms need p in (0, 1]")
    if not q >= 1:
        raise ValueError("atoms need q in [1, inf]")


@dataclass(frozen=True, eq=False)
class SimpleAtom:
    """Function supported in the level-``level`` atom ``block`` with vanishing ``E_level``."""

    values: np.ndarray
    level: int
    block: tuple
    p: float = 1.0
    q: float = math.inf

    def to_json(self) -> dict:
        return {"level": self.level, "block": list(self.block), "p": self.p, "q": _json_q(self.q), "values": self.values.tolist()}


def _json_q(q):
    return "inf" if math.isinf(q) else q


@dataclass(frozen=True)
class AtomReport:
    mean_defect: float
    support_defect: float
    size_ratio: float
    is_block: bool

    @property
    def mean_ok(self) -> bool:
        return self.mean_defect <= 1e-12

    @property
    def support_ok(self) -> bool:
        return self.support_defect == 0.0

    @property
    def size_ok(self) -> bool:
        return self.size_ratio <= 1.0 + 1e-12

    @property
    def ok(self) -> bool:
        return self.is_block and self.mean_ok and self.support_ok and self.size_ok

    def failures(self) -> list[str]:
        out = []
        if not self.is_block:
            out.append("block is not an atom of the stated level")
        if not self.mean_ok:
            out.append(f"mean-zero condition off by {self.mean_defect:.3g} (relative to sup norm)")
        if not self.support_ok:
            out.append(f"mass {self.support_defect:.3g} outside the block")
        if not self.size_ok:
            out.append(f"size condition exceeded by factor {self.size_ratio:.6g}")
        return out


def validate_simple_atom(space: MeasureSpace, filt: Filtration, atom: SimpleAtom, zero_base: bool = True) -> AtomReport:
    """Check the three defining conditions of a simple ``(p, q)``-atom.

    The mean-zero defect is ``max |E_k a|`` divided by ``max(1, ||a||_inf)``;
    the size ratio is ``||a||_q / P(A)^{1/q - 1/p}``. Under the zero-base
    convention the expectation at the first level is the zero operator, so
    atoms of level ``k_min`` carry no mean condition.
    """
    _check_exponents(atom.p, atom.q)
    a = as_func(space, atom.values)
    closed = filt.closed()
    block = tuple(sorted(atom.block))
    is_block = closed.k_min <= atom.level <= closed.k_max and block in {tuple(sorted(b)) for b in closed.partition(atom.level)}
    inside = np.zeros(space.n, dtype=bool)
    inside[list(block)] = True
    support_defect = float(np.max(np.abs(a[~inside]), initial=0.0))
    if zero_base and atom.level == closed.k_min:
        cond = np.zeros(space.n)
    elif closed.k_min <= atom.level <= closed.k_max:
        cond = closed.expectation(space, atom.level, a)
    else:
        cond = np.full(space.n, np.inf)
    scale = max(1.0, float(np.max(np.abs(a))))
    mean_defect = float(np.max(np.abs(cond))) / scale
    mass = space.measure(block)
    size_ratio = _qnorm(space.weights, a, atom.q) / mass ** (_inv(atom.q) - 1.0 / atom.p)
    return AtomReport(mean_defect, support_defect, size_ratio, bool(is_block))


@dataclass(frozen=True, eq=False)
class AtomicDecomposition:
    """Terms ``(lambda_i, atom_i)`` with ``f = sum lambda_i atom_i``.

    ``labels`` carries the ``(j, n, block label)`` ordering key of each term.
    """

    terms: tuple
    p: float
    q: float
    labels: tuple = field(default=())

    def reconstruct(self, n: int) -> np.ndarray:
        out = np.zeros(n)
        for lam, atom in self.terms:
            out = out + lam * atom.values
        return out

    def quasi_norm(self) -> float:
        if not self.terms:
            return 0.0
        lam = np.array([abs(t[0]) for t in self.terms])
        return float(np.sum(lam**self.p) ** (1.0 / self.p))

    def to_json(self) -> list:
        return [{"lambda": lam, **atom.to_json()} for lam, atom in self.terms]


def _single_atom(space: MeasureSpace, filt: Filtration, f: np.ndarray, p: float, q: float):
    """If ``f`` is a multiple of one simple atom, return the tightest such term."""
    w = space.weights
    mean_zero = abs(float(np.sum(w * f))) <= 1e-14 * float(np.sum(w * np.abs(f)))
    support = np.flatnonzero(f)
    for k in reversed(filt.levels):
        labels = filt.labels(k)[support]
        if not np.all(labels == labels[0]):
            continue
        if mean_zero or (k == filt.k_min and np.ptp(f[filt.labels(k) == labels[0]]) == 0):
            block = tuple(sorted(np.flatnonzero(filt.labels(k) == labels[0]).tolist()))
            lam = _qnorm(w, f, q) * space.measure(block) ** (1.0 / p - _inv(q))
            return lam, SimpleAtom(f / lam, k, block, p, q)
    return None


def _block_split(space: MeasureSpace, filt: Filtration, f: np.ndarray, p: float, q: float):
    """Cheapest split of ``f`` into one atom per block along the tree.

    A block either becomes a single atom or, when ``f`` has vanishing mean on
    every child block, is replaced by the best splits of its children. The
    root needs no mean condition under the zero-base convention.
    """
    w = space.weights
    levels = list(filt.levels)
    expo = 1.0 / p - _inv(q)

    def best(pos: int, members: np.ndarray):
        piece = np.zeros(space.n)
        piece[members] = f[members]
        if not np.any(piece[members]):
            return 0.0, []
        k = levels[pos]
        lam = _qnorm(w, piece, q) * float(np.sum(w[members])) ** expo
        single = (lam, [(lam, SimpleAtom(piece / lam, k, tuple(members.tolist()), p, q))])
        # next level that actually splits the block
        nxt = pos + 1
        while nxt < len(levels) and np.unique(filt.labels(levels[nxt])[members]).size == 1:
            nxt += 1
        if nxt == len(levels):
            return single
        lab = filt.labels(levels[nxt])[members]
        scale = float(np.sum(w[members] * np.abs(f[members])))
        children = [members[lab == c] for c in np.unique(lab)]
        if any(abs(float(np.sum(w[c] * f[c]))) > 1e-14 * scale for c in children):
            return single
        parts = [best(nxt, c) for c in children]
        cost = float(np.sum(np.array([c for c, _ in parts]) ** p)) ** (1.0 / p)
        if cost < single[0] * (1.0 - 1e-12):
            return cost, [t for _, ts in parts for t in ts]
        return single

    root = filt.labels(levels[0])
    if np.unique(root).size != 1:
        return None
    return best(0, np.arange(space.n))[1]


def stopping_time_decomposition(
    space: MeasureSpace, filt: Filtration, f, p: float = 1.0, q: float = 2.0, detect_single: bool = True
) -> AtomicDecomposition:
    """Atomic decomposition of ``f`` (zero-base convention) into simple ``(p, q)``-atoms.

    With ``detect_single`` two cheaper candidates are also tried: a multiple of
    one atom on the finest admissible block, and a split into one atom per
    block along the tree. The candidate with the smallest quasi-norm is
    returned, so the bound of :func:`stopping_time_constant` still holds.
    """
    _check_exponents(p, q)
    f = as_func(space, f)
    closed = filt.closed()
    if not np.any(f):
        return AtomicDecomposition((), p, q)
    shortcut = None
    if detect_single:
        single = _single_atom(space, closed, f, p, q)
        if single is not None:
            shortcut = AtomicDecomposition((single,), p, q, ((0, single[1].level, 0),))
        split = _block_split(space, closed, f, p, q)
        if split is not None and len(split) > 1:
            cand = AtomicDecomposition(tuple(split), p, q, tuple((0, a.level, i) for i, (_, a) in enumerate(split)))
            if shortcut is None or cand.quasi_norm() < shortcut.quasi_norm() * (1.0 - 1e-12):
                shortcut = cand
    exp = expand(space, closed, f, zero_base=True)
    d = exp.diffs
    s_run = np.sqrt(np.cumsum(predictable_squares(exp), axis=0))  # row m: s_{k_min+m+1}
    n_steps = d.shape[0]
    positive = s_run[s_run > 0]
    j_lo = math.floor(math.log2(float(positive.min()))) - 1
    j_hi = math.ceil(math.log2(float(positive.max()))) + 1

    def stop_index(j: int) -> np.ndarray:
        above = s_run > 2.0**j
        return np.where(above.any(axis=0), above.argmax(axis=0), n_steps)

    w = space.weights
    steps = np.arange(n_steps)[:, None]
    terms, labels = [], []
    lower = stop_index(j_lo)
    for j in range(j_lo, j_hi):
        upper = stop_index(j + 1)
        mask = (steps >= lower[None, :]) & (steps < upper[None, :])
        b = np.sum(np.where(mask, d, 0.0), axis=0)
        if np.any(b):
            for m in np.unique(lower[lower < n_steps]):
                k = closed.k_min + int(m)
                lab = closed.labels(k)
                hit = (lower == m) & (b != 0)
                for blk in np.unique(lab[hit]):
                    members = lab == blk
                    piece = np.where(members, b, 0.0)
                    if not np.any(piece):
                        continue
                    block = tuple(np.flatnonzero(members).tolist())
                    lam = _qnorm(w, piece, q) * space.measure(block) ** (1.0 / p - _inv(q))
                    terms.append((lam, SimpleAtom(piece / lam, k, block, p, q)))
                    labels.append((j, k, int(blk)))
        lower = upper
    order = sorted(range(len(terms)), key=lambda i: labels[i])
    dec = AtomicDecomposition(tuple(terms[i] for i in order), p, q, tuple(labels[i] for i in order))
    if shortcut is not None and shortcut.quasi_norm() <= dec.quasi_norm():
        return shortcut
    return dec


def atomic_norm_upper(space: MeasureSpace, filt: Filtration, f, p: float = 1.0, q: float = 2.0) -> float:
    """``(sum |lambda|^p)^{1/p}`` of the stopping-time decomposition."""
    return stopping_time_decomposition(space, filt, f, p, q).quasi_norm()


def stopping_time_constant(p: float) -> float:
    """Bound on ``(sum |lambda|^p)^{1/p} / ||s(f)||_p`` for ``q = 2`` (see module docs)."""
    return (2.0**p / (1.0 - 2.0**-p)) ** (1.0 / p)
