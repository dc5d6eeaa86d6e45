import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import brentq

from martpara.function_norms import (
    PHI,
    MusielakFunction,
    NormVariant,
    bmo_norm,
    diagonal_norm,
    hardy_norm,
    lipschitz_norm,
    lipschitz_sup_norm,
    lp_norm,
    luxembourg_norm,
    norm,
    sum_norm_upper,
)
from martpara.measure_space import Filtration, MeasureSpace

from strategies import trees

ALT = np.array([1.0, -1.0, 1.0, -1.0])


@pytest.mark.parametrize(
    "f, p, expected",
    [
        ([1, 1, 1, 1], 2, 1.0),
        ([1, -1, 2, -2], 1, 1.5),
        ([3, 0, 0, 0], math.inf, 3.0),
    ],
)
def test_lp(uniform4, f, p, expected):
    assert lp_norm(uniform4, np.array(f, float), p) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize("variant", ["Hp_S", "Hp_max"])
def test_hardy_on_fixture(uniform4, tree4, f4, variant):
    assert hardy_norm(uniform4, tree4, f4, variant, 1.0) == pytest.approx(1.5, rel=1e-15)


@pytest.mark.parametrize("variant", [v.value for v in NormVariant])
def test_zero_function(uniform4, tree4, variant):
    assert norm(uniform4, tree4, np.zeros(4), variant, 0.5 if variant.startswith("Lambda") else 1.0) == 0.0


def test_bmo_alternating(uniform4, tree4):
    assert bmo_norm(uniform4, tree4, ALT, "BMO") == pytest.approx(1.0)
    assert bmo_norm(uniform4, tree4, ALT, "bmo") == pytest.approx(1.0)


def test_bmo_of_constant(uniform4, tree4):
    assert bmo_norm(uniform4, tree4, np.full(4, 3.0), "bmo") == 0.0


def test_diagonal(uniform4, tree4, f4):
    assert diagonal_norm(uniform4, tree4, f4) == pytest.approx(1.5)
    assert diagonal_norm(uniform4, tree4, np.full(4, -2.5)) == pytest.approx(2.5)


@pytest.mark.parametrize("q", [1, 2])
def test_lipschitz_alternating(uniform4, tree4, q):
    assert lipschitz_norm(uniform4, tree4, ALT, 0.5, q) == pytest.approx(2.0, rel=1e-14)


def test_lipschitz_sup_alternating(uniform4, tree4):
    assert lipschitz_sup_norm(uniform4, tree4, ALT, 0.5) == pytest.approx(2.0, rel=1e-14)


def test_lipschitz_of_constant(uniform4, tree4):
    assert lipschitz_norm(uniform4, tree4, np.full(4, 7.0), 0.5) == 0.0
    assert lipschitz_sup_norm(uniform4, tree4, np.full(4, 7.0), 0.5) == 0.0


def _brute_lipschitz_sup(space, filt, g, p):
    alpha = 1 / p - 1
    best = 0.0
    for k in filt.levels:
        for block in filt.partition(k):
            b = list(block)
            m = space.weights[b].sum()
            mean = np.dot(space.weights[b], g[b]) / m
            best = max(best, m**-alpha * np.max(np.abs(g[b] - mean)))
    return best


@pytest.mark.parametrize("n", [2, 5, 16])
def test_lipschitz_sup_spike_matches_brute_force(n):
    space = MeasureSpace.uniform(n)
    filt = Filtration(((tuple(range(n)),), tuple((i,) for i in range(n))))
    g = np.zeros(n)
    g[n // 2] = 3.0
    assert lipschitz_sup_norm(space, filt, g, 0.5) == pytest.approx(_brute_lipschitz_sup(space, filt, g, 0.5), rel=1e-14)


def test_lipschitz_rejects_p_one(uniform4, tree4):
    with pytest.raises(ValueError):
        lipschitz_norm(uniform4, tree4, ALT, 1.0)


def test_luxembourg_of_constant_matches_root():
    c = 2.7
    t_star = brentq(lambda t: t / math.log(math.e + t) - 1.0, 1e-9, 100.0, xtol=1e-15)
    lam = luxembourg_norm(MeasureSpace.uniform(5), PHI, np.full(5, c))
    assert lam == pytest.approx(c / t_star, rel=1e-11)


def test_luxembourg_zero():
    assert luxembourg_norm(MeasureSpace.uniform(3), PHI, np.zeros(3)) == 0.0


def test_phi_is_an_orlicz_function():
    assert PHI.check(3).ok


@given(trees(), st.floats(1e-3, 1e3))
def test_luxembourg_root_and_homogeneity(case, c):
    space, _, rng = case
    f = rng.standard_normal(space.n)
    lam = luxembourg_norm(space, PHI, f)
    assert space.integral(PHI(np.abs(f) / lam)) == pytest.approx(1.0, abs=1e-8)
    assert luxembourg_norm(space, PHI, c * f) == pytest.approx(c * lam, rel=1e-9)


def test_luxembourg_pointwise_function():
    space = MeasureSpace.uniform(4)
    psi = MusielakFunction(lambda t: t**2 * np.array([1.0, 2.0, 3.0, 4.0]), "weighted square")
    f = np.array([1.0, 0.5, -2.0, 0.0])
    lam = luxembourg_norm(space, psi, f)
    exact = math.sqrt(np.sum(space.weights * f**2 * [1, 2, 3, 4]))
    assert lam == pytest.approx(exact, rel=1e-11)


def test_sum_split_strategies(uniform4, tree4, f4):
    left, split = sum_norm_upper(uniform4, tree4, f4, "trivial_left")
    assert left == pytest.approx(hardy_norm(uniform4, tree4, f4, "hp_s", 1.0))
    assert np.allclose(split.g, f4)
    right, _ = sum_norm_upper(uniform4, tree4, f4, "trivial_right")
    assert right == pytest.approx(diagonal_norm(uniform4, tree4, f4))


@given(trees(max_n=20))
def test_sum_split_descent_beats_trivial(case):
    space, filt, rng = case
    f = rng.standard_normal(space.n)
    best, split = sum_norm_upper(space, filt, f)
    left, _ = sum_norm_upper(space, filt, f, "trivial_left")
    right, _ = sum_norm_upper(space, filt, f, "trivial_right")
    assert best <= min(left, right) * (1 + 1e-12)
    assert np.allclose(split.g + split.h, f, atol=1e-12)
