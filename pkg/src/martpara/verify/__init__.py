"""Randomized verification of constants and identities."""

from .report import VerificationReport, estimate_constant, ladder_growth, reports_to_csv, trial_rng
from .samplers import FAMILIES, Sampler, sample
from .suites import SUITES, get_suite, replay_witness, run_suite

__all__ = [
    "FAMILIES",
    "SUITES",
    "Sampler",
    "VerificationReport",
    "estimate_constant",
    "get_suite",
    "ladder_growth",
    "replay_witness",
    "reports_to_csv",
    "run_suite",
    "sample",
    "trial_rng",
]
