import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from martpara.atomic import (
    SimpleAtom,
    atomic_norm_upper,
    stopping_time_constant,
    stopping_time_decomposition,
    validate_simple_atom,
)
from martpara.martingale_ops import conditional_square_function, expand
from martpara.measure_space import Filtration, MeasureSpace

from strategies import trees

PAIR = (0, 1)


def _tree8():
    return Filtration(
        (
            (tuple(range(8)),),
            ((0, 1, 2, 3), (4, 5, 6, 7)),
            ((0, 1), (2, 3), (4, 5), (6, 7)),
            tuple((i,) for i in range(8)),
        )
    )


def test_valid_atom(uniform4, tree4):
    atom = SimpleAtom(np.array([2.0, -2.0, 0.0, 0.0]), 1, PAIR, 1.0, math.inf)
    assert validate_simple_atom(uniform4, tree4, atom).ok


def test_size_violation(uniform4, tree4):
    rep = validate_simple_atom(uniform4, tree4, SimpleAtom(np.array([3.0, -3.0, 0.0, 0.0]), 1, PAIR, 1.0, math.inf))
    assert not rep.size_ok and rep.size_ratio == pytest.approx(1.5)
    assert rep.mean_ok


def test_mean_violation(uniform4, tree4):
    rep = validate_simple_atom(uniform4, tree4, SimpleAtom(np.array([1.0, 1.0, 0.0, 0.0]), 1, PAIR, 1.0, math.inf))
    assert not rep.mean_ok
    assert any("mean" in msg for msg in rep.failures())


def test_support_violation(uniform4, tree4):
    rep = validate_simple_atom(uniform4, tree4, SimpleAtom(np.array([1.0, -1.0, 0.5, 0.0]), 1, PAIR, 1.0, math.inf))
    assert not rep.support_ok


def test_bad_exponents_rejected(uniform4, tree4):
    with pytest.raises(ValueError):
        validate_simple_atom(uniform4, tree4, SimpleAtom(np.zeros(4), 1, PAIR, 1.5, math.inf))


def test_multiple_of_atom_gives_one_term(uniform4, tree4):
    a = np.array([2.0, -2.0, 0.0, 0.0])
    dec = stopping_time_decomposition(uniform4, tree4, 3.0 * a, 1.0, math.inf)
    assert len(dec.terms) == 1
    lam, atom = dec.terms[0]
    assert lam == pytest.approx(3.0)
    assert np.allclose(atom.values, a)


def test_zero_gives_empty_decomposition(uniform4, tree4):
    dec = stopping_time_decomposition(uniform4, tree4, np.zeros(4))
    assert dec.terms == () and dec.quasi_norm() == 0.0


def test_single_atom_norm():
    space = MeasureSpace.uniform(8)
    a = np.array([4.0, -4.0, 0, 0, 0, 0, 0, 0])
    assert atomic_norm_upper(space, _tree8(), a, 1.0, math.inf) <= 1 + 1e-10


def test_disjoint_atoms_norm():
    space = MeasureSpace.uniform(8)
    f = np.array([4.0, -4.0, 0, 0, 2, 2, -2, -2])
    dec = stopping_time_decomposition(space, _tree8(), f, 1.0, math.inf)
    assert dec.quasi_norm() <= 2 + 1e-10
    assert {a.block for _, a in dec.terms} == {(0, 1), (4, 5, 6, 7)}


def test_random_uniform_tree_reconstructs():
    rng = np.random.default_rng(3)
    space = MeasureSpace.uniform(8)
    f = rng.standard_normal(8)
    dec = stopping_time_decomposition(space, _tree8(), f, 1.0, 2.0)
    assert np.max(np.abs(dec.reconstruct(8) - f)) <= 1e-10
    assert all(validate_simple_atom(space, _tree8(), a).ok for _, a in dec.terms)


def test_constant_values():
    # frozen from the closed form (2^p / (1 - 2^-p))^(1/p)
    assert stopping_time_constant(1.0) == pytest.approx(4.0)
    assert stopping_time_constant(0.5) == pytest.approx(2.0 / (1 - 2**-0.5) ** 2)


@given(trees(max_n=60), st.sampled_from([0.5, 0.75, 1.0]), st.sampled_from([2.0, math.inf]), st.booleans())
def test_decomposition_properties(case, p, q, shortcut):
    space, filt, rng = case
    f = rng.standard_normal(space.n) * 10.0 ** rng.uniform(-2, 2)
    dec = stopping_time_decomposition(space, filt, f, p, q, detect_single=shortcut)
    assert np.max(np.abs(dec.reconstruct(space.n) - f)) <= 1e-10 * max(1.0, np.max(np.abs(f)))
    for _, atom in dec.terms:
        assert validate_simple_atom(space, filt, atom).ok
    if q == 2.0:
        s = conditional_square_function(space, filt, expand(space, filt, f))
        bound = stopping_time_constant(p) * float(np.sum(space.weights * s**p)) ** (1 / p)
        assert dec.quasi_norm() <= bound * (1 + 1e-12)
