import numpy as np
import pytest
from hypothesis import given

from martpara.measure_space import (
    Filtration,
    MeasureSpace,
    conditional_expectation,
    regularity_constant,
    restrict_space,
    validate_filtration,
)

from strategies import trees

PAIRS = ((0, 1), (2, 3))


def test_dyadic_tree_is_valid(uniform4, tree4):
    assert validate_filtration(uniform4, tree4).ok


def test_coarsening_is_reported(uniform4):
    bad = Filtration((PAIRS, ((0, 1, 2, 3),)))
    report = validate_filtration(uniform4, bad)
    assert not report.ok
    assert any("level 1" in v and "nestedness" in v for v in report.violations)


def test_straddling_block_is_reported(uniform4):
    bad = Filtration((((0, 1), (2, 3)), ((0,), (1, 2), (3,))))
    assert any("straddles" in v for v in validate_filtration(uniform4, bad).violations)


@pytest.mark.parametrize(
    "partition, expected",
    [
        ([[0, 1, 2, 3]], [2.5] * 4),
        ([[0, 1], [2, 3]], [1.5, 1.5, 3.5, 3.5]),
    ],
)
def test_block_averages(uniform4, partition, expected):
    out = conditional_expectation(uniform4, partition, [1, 2, 3, 4])
    assert np.allclose(out, expected, rtol=0, atol=1e-15)


def test_weighted_block_averages():
    space = MeasureSpace(np.array([0.1, 0.3, 0.2, 0.4]))
    out = conditional_expectation(space, PAIRS, [1, 2, 3, 4])
    assert np.allclose(out, [1.75, 1.75, 11 / 3, 11 / 3], rtol=1e-15)


def test_rejects_bad_weights():
    with pytest.raises(ValueError):
        MeasureSpace(np.array([0.5, 0.6]))
    with pytest.raises(ValueError):
        MeasureSpace(np.array([1.0, 0.0]), "sigma_finite")


@pytest.mark.parametrize(
    "weights, partitions, expected",
    [
        ([0.25] * 4, (((0, 1, 2, 3),), PAIRS, ((0,), (1,), (2,), (3,))), 2.0),
        ([0.1, 0.9], (((0, 1),), ((0,), (1,))), 10.0),
        ([0.25] * 4, (((0, 1, 2, 3),),), 1.0),
    ],
)
def test_regularity_constant(weights, partitions, expected):
    space = MeasureSpace(np.array(weights))
    assert regularity_constant(space, Filtration(partitions)) == pytest.approx(expected, rel=1e-12)


def test_restrict_uniform(uniform4, tree4):
    sub, filt = restrict_space(uniform4, tree4, 1, (0, 1))
    assert np.allclose(sub.weights, [0.5, 0.5])
    assert filt.partitions == (((0, 1),), ((0,), (1,)))


def test_restrict_weighted(tree4):
    space = MeasureSpace(np.array([0.1, 0.3, 0.2, 0.4]))
    sub, _ = restrict_space(space, tree4, 1, (2, 3))
    assert np.allclose(sub.weights, [1 / 3, 2 / 3], rtol=1e-14)


def test_restrict_whole_space_is_identity(uniform4, tree4):
    sub, filt = restrict_space(uniform4, tree4, 0, (0, 1, 2, 3))
    assert np.array_equal(sub.weights, uniform4.weights)
    assert filt.partitions == tree4.partitions


def test_json_round_trip(uniform4, tree4):
    assert np.array_equal(MeasureSpace.from_json(uniform4.to_json()).weights, uniform4.weights)
    assert Filtration.from_json(tree4.to_json()).partitions == tree4.partitions


@given(trees())
def test_expectation_is_a_projection(case):
    space, filt, rng = case
    f = rng.standard_normal(space.n)
    for k in filt.levels:
        e = filt.expectation(space, k, f)
        assert np.allclose(filt.expectation(space, k, e), e, atol=1e-12)
        assert space.integral(e) == pytest.approx(space.integral(f), abs=1e-12)


@given(trees())
def test_tower_property(case):
    space, filt, rng = case
    f = rng.standard_normal(space.n)
    levels = list(filt.levels)
    for j in levels:
        for k in levels:
            lhs = filt.expectation(space, j, filt.expectation(space, k, f))
            assert np.allclose(lhs, filt.expectation(space, min(j, k), f), atol=1e-12)


@given(trees())
def test_random_trees_validate(case):
    space, filt, _ = case
    assert validate_filtration(space, filt).ok


@given(trees())
def test_restriction_preserves_conditional_expectations(case):
    space, filt, rng = case
    n = min(1, filt.k_max)
    block = filt.partition(n)[0]
    f = np.zeros(space.n)
    f[list(block)] = rng.standard_normal(len(block))
    sub, sfilt = restrict_space(space, filt, n, block)
    for k in sfilt.levels:
        full = filt.expectation(space, k + n, f)[list(sorted(block))]
        assert np.allclose(sfilt.expectation(sub, k, f[list(sorted(block))]), full, atol=1e-12)
