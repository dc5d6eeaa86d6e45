"""Verification reports and the generic sup-ratio estimator."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

QUANTILES = (0.5, 0.9, 0.99, 1.0)


def trial_rng(seed: int, rung: int, trial: int) -> np.random.Generator:
    """Independent stream for one trial, split from the suite seed by a counter."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(rung, trial)))


def ladder_growth(sups) -> float:
    """``max_{i<j} s_j / s_i`` over a size ladder (1 when fewer than two rungs)."""
    sups = [s for s in sups if s is not None]
    best = 1.0
    for i in range(len(sups)):
        for j in range(i + 1, len(sups)):
            if sups[i] > 0:
                best = max(best, sups[j] / sups[i])
            elif sups[j] > 0:
                best = math.inf
    return best


def _clean(x):
    """JSON-safe copy: arrays to lists, non-finite floats to strings."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    return x


@dataclass
class VerificationReport:
    """Outcome of one suite. ``runtime`` is the only field allowed to differ between runs."""

    suite: str
    seed: int
    trials: int
    skipped: int
    sup_ratio: float
    witness: dict
    quantiles: dict
    passed: bool
    tolerance: dict
    details: dict = field(default_factory=dict)
    runtime: float = 0.0

    def to_json(self, runtime: bool = True) -> dict:
        out = {
            "suite": self.suite,
            "seed": self.seed,
            "trials": self.trials,
            "skipped": self.skipped,
            "sup_ratio": self.sup_ratio,
            "witness": self.witness,
            "quantiles": self.quantiles,
            "passed": self.passed,
            "tolerance": self.tolerance,
            "details": self.details,
        }
        if runtime:
            out["runtime"] = self.runtime
        return _clean(out)

    def dumps(self, runtime: bool = True) -> str:
        return json.dumps(self.to_json(runtime), sort_keys=True)

    def csv_row(self) -> dict:
        q = {f"q{k}": v for k, v in self.quantiles.items()}
        return {
            "suite": self.suite,
            "seed": self.seed,
            "trials": self.trials,
            "skipped": self.skipped,
            "sup_ratio": repr(float(self.sup_ratio)),
            "passed": self.passed,
            "runtime": f"{self.runtime:.3f}",
            **{k: repr(float(v)) for k, v in q.items()},
        }


def reports_to_csv(reports) -> str:
    rows = [r.csv_row() for r in reports]
    buf = io.StringIO()
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)
    return buf.getvalue()


def estimate_constant(
    numerator: Callable,
    denominator: Callable,
    make: Callable[[np.random.Generator], object],
    trials: int,
    seed: int = 0,
    suite: str = "adhoc",
) -> VerificationReport:
    """Sup over trials of ``numerator(x) / denominator(x)`` with ``x = make(rng)``.

    Trials whose denominator vanishes are skipped and counted; raises
    ``ValueError`` when every trial is degenerate.
    """
    start = time.perf_counter()
    ratios, best, witness, skipped = [], -math.inf, {}, 0
    for t in range(trials):
        x = make(trial_rng(seed, 0, t))
        den = float(denominator(x))
        if den == 0 or not math.isfinite(den):
            skipped += 1
            continue
        r = float(numerator(x)) / den
        ratios.append(r)
        if r > best:
            best, witness = r, {"trial": t}
    if not ratios:
        raise ValueError("estimate_constant: every trial was degenerate")
    quant = {str(q): float(np.quantile(ratios, q)) for q in QUANTILES}
    ok = math.isfinite(best) and skipped <= 0.1 * trials
    return VerificationReport(suite, seed, trials, skipped, best, witness, quant, ok, {"min_nondegenerate": 0.9}, runtime=time.perf_counter() - start)
