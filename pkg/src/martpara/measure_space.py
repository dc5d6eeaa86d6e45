"""Finite measure spaces, atom-generated filtrations and conditional expectation.

A filtration is stored as a list of nested partitions of the point indices
``0..n-1``. Blocks are given as tuples of point indices; internally every level
is also kept as a label array so that conditional expectations are vectorized.
Block sums go through ``np.add.reduceat`` on label-sorted data, which uses
pairwise summation inside each segment.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

PROBABILITY = "probability"
SIGMA_FINITE = "sigma_finite"
_KINDS = (PROBABILITY, SIGMA_FINITE)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class MeasureSpace:
    """Finite weighted point set. Point ``i`` carries mass ``weights[i]``.

    ``points`` are optional labels (for example the parent ids of a restricted
    space); all computations index points by position.
    """

    weights: np.ndarray
    kind: str = PROBABILITY
    points: tuple = field(default=())

    def __post_init__(self):
        w = _frozen(self.weights)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a nonempty 1-d array")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ValueError("weights must be finite and strictly positive")
        if self.kind not in _KINDS:
            raise ValueError(f"unknown space kind {self.kind!r}")
        if self.kind == PROBABILITY and abs(float(np.sum(w)) - 1.0) > 1e-12:
            raise ValueError(f"probability weights sum to {float(np.sum(w))!r}, not 1")
        object.__setattr__(self, "weights", w)
        if not self.points:
            object.__setattr__(self, "points", tuple(range(w.size)))
        elif len(self.points) != w.size:
            raise ValueError("points and weights differ in length")

    @classmethod
    def uniform(cls, n: int) -> "MeasureSpace":
        return cls(np.full(n, 1.0 / n))

    @classmethod
    def normalized(cls, weights) -> "MeasureSpace":
        """Probability space with weights proportional to ``weights``."""
        w = np.asarray(weights, dtype=float)
        w = w / w.sum()
        # absorb the last rounding error so the sum check passes
        w[-1] = 1.0 - np.sum(w[:-1])
        return cls(w)

    @property
    def n(self) -> int:
        return self.weights.size

    @property
    def total(self) -> float:
        return float(np.sum(self.weights))

    def integral(self, f) -> float:
        return float(np.sum(self.weights * np.asarray(f, dtype=float)))

    def measure(self, idx) -> float:
        return float(np.sum(self.weights[np.asarray(idx, dtype=int)]))

    def to_json(self) -> dict:
        return {"kind": self.kind, "weights": self.weights.tolist()}

    @classmethod
    def from_json(cls, data: dict) -> "MeasureSpace":
        if "weights" not in data:
            raise ValueError("space JSON needs a 'weights' field")
        return cls(np.asarray(data["weights"], dtype=float), data.get("kind", PROBABILITY))


def as_func(space: MeasureSpace, f) -> np.ndarray:
    """Check that ``f`` is a finite real vector on ``space`` and return it as floats."""
    a = np.asarray(f, dtype=float)
    if a.shape != (space.n,):
        raise ValueError(f"function has shape {a.shape}, space has {space.n} points")
    if not np.all(np.isfinite(a)):
        raise ValueError("function values must be finite")
    return a


class BlockIndex:
    """Label-array view of one partition, ready for segment sums."""

    def __init__(self, labels: np.ndarray):
        labels = np.asarray(labels, dtype=np.intp)
        self.labels = labels
        self.n_blocks = int(labels.max()) + 1 if labels.size else 0
        self.perm = np.argsort(labels, kind="stable")
        sorted_labels = labels[self.perm]
        self.starts = np.flatnonzero(np.r_[True, sorted_labels[1:] != sorted_labels[:-1]])
        self.sizes = np.diff(np.r_[self.starts, labels.size])
        self.all_singletons = bool(np.all(self.sizes == 1))

    @classmethod
    def from_blocks(cls, blocks: Sequence[Sequence[int]], n: int) -> "BlockIndex":
        labels = np.full(n, -1, dtype=np.intp)
        for b, block in enumerate(blocks):
            idx = np.asarray(block, dtype=np.intp)
            if idx.size == 0:
                raise ValueError(f"block {b} is empty")
            if np.any(idx < 0) or np.any(idx >= n):
                raise ValueError(f"block {b} has point ids outside 0..{n - 1}")
            if np.any(labels[idx] >= 0):
                raise ValueError(f"block {b} overlaps an earlier block")
            labels[idx] = b
        if np.any(labels < 0):
            raise ValueError(f"partition misses points {np.flatnonzero(labels < 0).tolist()}")
        return cls(labels)

    def block_sums(self, values: np.ndarray) -> np.ndarray:
        """Pairwise-summed totals of ``values`` per block (indexed by label)."""
        return np.add.reduceat(values[self.perm], self.starts)

    def blocks(self) -> list[np.ndarray]:
        return np.split(self.perm, self.starts[1:])

    def expectation(self, weights: np.ndarray, f: np.ndarray) -> np.ndarray:
        if self.all_singletons:
            return np.array(f, dtype=float)
        means = self.block_sums(weights * f) / self.block_sums(weights)
        return means[self.labels]


@dataclass(frozen=True, eq=False)
class Filtration:
    """Nested partitions for the levels ``k_min .. k_min + len(partitions) - 1``.

    The constructor does not validate nestedness so that malformed inputs can be
    reported by :func:`validate_filtration`; operations that need label arrays
    raise ``ValueError`` on partitions that are not partitions.
    """

    partitions: tuple
    k_min: int = 0
    separating: bool = False
    n_points: int = 0

    def __post_init__(self):
        parts = tuple(tuple(tuple(int(i) for i in block) for block in level) for level in self.partitions)
        if not parts:
            raise ValueError("a filtration needs at least one level")
        object.__setattr__(self, "partitions", parts)
        if not self.n_points:
            ids = [i for level in parts for block in level for i in block]
            object.__setattr__(self, "n_points", max(ids) + 1 if ids else 0)

    @classmethod
    def from_labels(cls, labels, k_min: int = 0, separating: bool = False) -> "Filtration":
        """Build from an ``(levels, n)`` array of per-level block labels."""
        labels = np.atleast_2d(np.asarray(labels))
        parts = []
        for row in labels:
            _, inv = np.unique(row, return_inverse=True)
            idx = BlockIndex(inv)
            parts.append([tuple(b.tolist()) for b in idx.blocks()])
        filt = cls(tuple(parts), k_min, separating, labels.shape[1])
        # seed the cache with the canonical label arrays we already have
        filt.__dict__["_index"] = [BlockIndex(np.unique(row, return_inverse=True)[1]) for row in labels]
        return filt

    @property
    def k_max(self) -> int:
        return self.k_min + len(self.partitions) - 1

    @property
    def levels(self) -> range:
        return range(self.k_min, self.k_max + 1)

    @property
    def n_levels(self) -> int:
        return len(self.partitions)

    @cached_property
    def _index(self) -> list[BlockIndex]:
        return [BlockIndex.from_blocks(level, self.n_points) for level in self.partitions]

    def index(self, k: int) -> BlockIndex:
        if k < self.k_min or k > self.k_max:
            raise ValueError(f"level {k} outside [{self.k_min}, {self.k_max}]")
        return self._index[k - self.k_min]

    def labels(self, k: int) -> np.ndarray:
        return self.index(k).labels

    def partition(self, k: int) -> tuple:
        return self.partitions[k - self.k_min]

    @property
    def has_root(self) -> bool:
        return len(self.partitions[0]) == 1

    @property
    def is_separating(self) -> bool:
        return self._index[-1].all_singletons

    def closed(self) -> "Filtration":
        """Return the filtration with a terminal singleton level when the finest
        level is not already discrete, so that every function is measurable
        with respect to the last level."""
        if self.is_separating:
            return self
        singletons = tuple((i,) for i in range(self.n_points))
        filt = Filtration(self.partitions + (singletons,), self.k_min, True, self.n_points)
        filt.__dict__["_index"] = self._index + [BlockIndex(np.arange(self.n_points))]
        return filt

    def expectation(self, space: MeasureSpace, k: int, f) -> np.ndarray:
        return self.index(k).expectation(space.weights, np.asarray(f, dtype=float))

    def parent_labels(self, k: int) -> np.ndarray:
        """For each block at level ``k`` (> k_min), the label of its parent block."""
        child = self.index(k)
        parent = self.labels(k - 1)
        return parent[child.perm[child.starts]]

    def to_json(self) -> dict:
        return {"k_min": self.k_min, "partitions": [[list(b) for b in level] for level in self.partitions]}

    @classmethod
    def from_json(cls, data: dict, n_points: int = 0) -> "Filtration":
        if "partitions" not in data:
            raise ValueError("filtration JSON needs a 'partitions' field")
        return cls(tuple(data["partitions"]), int(data.get("k_min", 0)), bool(data.get("separating", False)), n_points)


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {"ok": self.ok, "violations": list(self.violations)}


def validate_filtration(space: MeasureSpace, filt: Filtration) -> ValidationReport:
    """List nestedness violations, coverage gaps, overlaps and empty blocks."""
    report = ValidationReport()
    n = space.n
    owner_prev = None
    for pos, level in enumerate(filt.partitions):
        k = filt.k_min + pos
        owner = np.full(n, -1, dtype=np.intp)
        for b, block in enumerate(level):
            if not block:
                report.violations.append(f"level {k}: block {b} is empty")
                continue
            bad = [i for i in block if i < 0 or i >= n]
            if bad:
                report.violations.append(f"level {k}: block {b} has unknown points {bad}")
            ids = np.array([i for i in block if 0 <= i < n], dtype=np.intp)
            clash = ids[owner[ids] >= 0]
            if clash.size:
                report.violations.append(f"level {k}: block {b} overlaps another block at points {clash.tolist()}")
            owner[ids] = b
        gaps = np.flatnonzero(owner < 0)
        if gaps.size:
            report.violations.append(f"level {k}: points {gaps.tolist()} are not covered")
        if owner_prev is not None:
            for b, block in enumerate(level):
                ids = [i for i in block if 0 <= i < n]
                parents = sorted({int(owner_prev[i]) for i in ids if owner_prev[i] >= 0})
                if len(parents) > 1:
                    report.violations.append(
                        f"level {k}: block {b} straddles parents {parents} at level {k - 1} (nestedness)"
                    )
        owner_prev = owner
    if filt.separating and any(len(block) != 1 for block in filt.partitions[-1]):
        report.violations.append(f"level {filt.k_max}: declared separating but not all blocks are singletons")
    return report


def conditional_expectation(space: MeasureSpace, partition, f) -> np.ndarray:
    """Block-wise weighted average of ``f``.

    ``partition`` is either a sequence of blocks or a :class:`BlockIndex`.
    """
    f = as_func(space, f)
    idx = partition if isinstance(partition, BlockIndex) else BlockIndex.from_blocks(partition, space.n)
    return idx.expectation(space.weights, f)


def regularity_constant(space: MeasureSpace, filt: Filtration) -> float:
    """Largest mass ratio between an atom's parent and the atom itself."""
    if not filt.has_root:
        raise ValueError("regularity needs a root level")
    worst = 1.0
    for k in filt.levels[1:]:
        child = filt.index(k)
        parent = filt.index(k - 1)
        child_mass = child.block_sums(space.weights)
        parent_mass = parent.block_sums(space.weights)[filt.parent_labels(k)]
        worst = max(worst, float(np.max(parent_mass / child_mass)))
    return worst


def restrict_space(space: MeasureSpace, filt: Filtration, n: int, block: Iterable[int]) -> tuple[MeasureSpace, Filtration]:
    """Conditional probability space on a level-``n`` atom with the shifted trace filtration."""
    target = tuple(sorted(int(i) for i in block))
    if target not in {tuple(sorted(b)) for b in filt.partition(n)}:
        raise ValueError(f"{list(target)} is not a block at level {n}")
    ids = np.array(target, dtype=np.intp)
    local = {int(g): i for i, g in enumerate(target)}
    mass = space.weights[ids]
    sub = MeasureSpace.normalized(mass) if len(ids) > 1 else MeasureSpace(np.ones(1))
    sub = MeasureSpace(sub.weights, PROBABILITY, tuple(space.points[i] for i in target))
    parts = []
    for k in range(n, filt.k_max + 1):
        level = []
        for b in filt.partition(k):
            trace = [local[i] for i in b if i in local]
            if trace:
                level.append(tuple(sorted(trace)))
        parts.append(tuple(sorted(level)))
    return sub, Filtration(tuple(parts), 0, filt.separating, len(ids))


def load_json(path: str) -> dict:
    """Read a JSON file, turning decoder errors into messages with line context."""
    with open(path) as fh:
        text = fh.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
