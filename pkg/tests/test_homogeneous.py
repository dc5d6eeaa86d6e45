import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from martpara.dyadic_geometry import (
    AdjacentSystems,
    QuasiMetricSpace,
    build_dyadic_system,
    cover_ball,
    euclidean_shifted_grids,
    euclidean_system,
    system_to_filtration,
)
from martpara.function_norms import luxembourg_norm
from martpara.homogeneous import (
    BallAtom,
    BasePointContext,
    PsiAtom,
    ball_atom_to_dyadic,
    ball_decomposition,
    ball_integral_growth_check,
    ball_norm,
    cube_oscillation,
    decay_profile,
    dyadic_atom_to_ball,
    indicator_norm,
    multiplier_check,
    multiplier_inequality,
    musielak_psi,
    pi_f_operators,
    plus_norm,
    psi_value,
    validate_ball_atom,
    validate_psi_atom,
    weight_bound_ratio,
)
from martpara.martingale_ops import paraproducts
from martpara.verify.samplers import metric_cloud, random_atom


def _line(xs, weights=None):
    return QuasiMetricSpace.from_coords(np.asarray(xs, float), weights)


def _brute_ball_norm(space, f, kind, alpha=0.0):
    # every open ball B(x, r) with r just above each distance, plus the whole space
    w = space.weights
    best = 0.0
    for x in range(space.n):
        for r in np.r_[np.nextafter(space.dist[x], np.inf), space.dist.max() * 2 + 1]:
            b = space.dist[x] < r
            m = w[b].sum()
            if kind == "BMO_mu":
                mean = np.dot(w[b], f[b]) / m
                best = max(best, np.dot(w[b], np.abs(f[b] - mean)) / m)
            else:
                best = max(best, np.ptp(f[b]) / m**alpha)
    return best


@pytest.mark.parametrize("kind", ["BMO_mu", "Lip_alpha"])
def test_constant_has_zero_ball_norm(kind):
    space = metric_cloud(np.random.default_rng(0), 20, "line")
    assert ball_norm(space, np.full(20, 3.0), kind, 1.0) == pytest.approx(0.0, abs=1e-14)


@pytest.mark.parametrize("kind, alpha", [("BMO_mu", 0.0), ("Lip_alpha", 1.0), ("Lip_alpha", 0.5)])
def test_point_indicator_matches_scan(kind, alpha):
    space = _line(np.arange(9) / 9, np.ones(9))
    f = np.zeros(9)
    f[4] = 1.0
    assert ball_norm(space, f, kind, alpha) == pytest.approx(_brute_ball_norm(space, f, kind, alpha), rel=1e-13)


def test_two_point_lipschitz():
    space = _line([0.0, 1.0], [0.5, 0.5])
    assert ball_norm(space, np.array([0.0, 1.0]), "Lip_alpha", 1.0) == pytest.approx(1.0)


@given(st.integers(0, 2**32 - 1), st.sampled_from(["line", "plane", "circle"]))
@settings(max_examples=15)
def test_ball_norms_match_scan(seed, kind):
    rng = np.random.default_rng(seed)
    space = metric_cloud(rng, 15, kind)
    f = rng.standard_normal(15)
    assert ball_norm(space, f, "BMO_mu") == pytest.approx(_brute_ball_norm(space, f, "BMO_mu"), rel=1e-12)
    assert ball_norm(space, f, "Lip_alpha", 1.0) == pytest.approx(_brute_ball_norm(space, f, "Lip_alpha", 1.0), rel=1e-12)


def test_psi_vanishes_at_zero():
    space = _line([0.0, 0.5, 1.0])
    assert psi_value(space, 0, 1.0, 2, 0.0) == 0.0
    assert psi_value(space, 0, 0.5, 2, 0.0) == 0.0


@pytest.mark.parametrize("p", [1.0, 0.5, 0.8])
def test_psi_vector_matches_pointwise(p):
    space = metric_cloud(np.random.default_rng(4), 12, "line", 8.0)
    t = np.linspace(0.1, 50, 12)
    vec = musielak_psi(space, 3, p)(t)
    point = [psi_value(space, 3, p, x, t[x]) for x in range(12)]
    assert np.allclose(vec, point, rtol=1e-15)


def test_psi_values_by_formula():
    space = _line([0.0, 1.0, 3.0], [1.0, 2.0, 4.0])
    assert psi_value(space, 0, 1.0, 2, 2.0) == pytest.approx(2.0 / (math.log(math.e + 3) + math.log(math.e + 2)))
    # open ball B(0, 3) holds the first two points, mass 3
    assert psi_value(space, 0, 0.5, 2, 2.0) == pytest.approx(2.0 / (1 + (2.0 * 4.0) ** 0.5))


@pytest.mark.parametrize("p", [1.0, 0.5])
def test_psi_is_a_growth_function(p):
    space = metric_cloud(np.random.default_rng(1), 10, "line", 8.0)
    assert musielak_psi(space, 0, p).check(10).ok


def _two_cube_system():
    space = _line([0.1, 0.2, 0.5, 0.9], np.ones(4))
    return space, euclidean_system(space, (1,), 2, 0)


def test_two_cube_level_zero():
    space, system = _two_cube_system()
    assert system.n_cubes(0) == 2
    ctx = BasePointContext(space, 0)
    g = np.array([1.0, 1.0, 0.0, 0.0])
    assert plus_norm(space, system, ctx, g, "BMO_plus") == pytest.approx(1.0 + 1.0 / math.log(math.e + 0.8))
    assert plus_norm(space, system, ctx, g, "Lip_plus", 0.5) == pytest.approx(1.25)


def test_plus_norms_of_constants():
    space, system = _two_cube_system()
    ctx = BasePointContext(space, 0)
    g = np.full(4, -3.0)
    assert plus_norm(space, system, ctx, g, "BMO_plus") == pytest.approx(3.0)
    assert plus_norm(space, system, ctx, g, "Lip_plus", 0.5) == pytest.approx(3.0)
    assert plus_norm(space, system, ctx, g, "BMO_psi", 0.5) == 0.0


def test_missing_level_zero():
    space = _line([0.1, 0.2, 0.5, 0.9])
    system = euclidean_system(space, (0,), 4, 2)
    with pytest.raises(ValueError, match="level 0"):
        BasePointContext(space, 0).q0(system)


def test_cube_oscillation_of_alternating():
    space = _line([0.1, 0.3, 0.6, 0.8], np.full(4, 0.25))
    ms, filt = system_to_filtration(euclidean_system(space, (0,), 2, 0))
    g = np.array([1.0, -1.0, 1.0, -1.0])
    assert cube_oscillation(ms, filt, g) == pytest.approx(1.0)
    assert cube_oscillation(ms, filt, g, 2, 1.0) == pytest.approx(2.0)


def _ball_atom(space, x, r, p, scale=1.0):
    members = space.ball(x, r)
    v = np.zeros(space.n)
    v[members] = np.linspace(-1, 1, members.size)
    v[members] -= np.dot(space.weights[members], v[members]) / space.weights[members].sum()
    v *= space.weights[members].sum() ** (-1 / p) / np.max(np.abs(v)) * scale
    return BallAtom(v, x, r, p, math.inf)


def test_ball_atom_validation():
    space = _line(np.arange(10) / 10, np.full(10, 0.1))
    good = _ball_atom(space, 5, 0.25, 1.0)
    assert validate_ball_atom(space, good).ok
    big = _ball_atom(space, 5, 0.25, 1.0, scale=2.0)
    rep = validate_ball_atom(space, big)
    assert not rep.ok and rep.size_ratio == pytest.approx(2.0)
    shifted = BallAtom(good.values + 0.5 * (good.values != 0), 5, 0.25, 1.0)
    assert any("mean" in m for m in validate_ball_atom(space, shifted).failures())


def test_psi_atom_validation():
    space = _line(np.arange(6) / 6, np.ones(6))
    region = (1, 2)
    bound = 1.0 / indicator_norm(space, 0, 0.5, region)
    a = np.zeros(6)
    a[1], a[2] = bound, -bound
    assert validate_psi_atom(space, 0, PsiAtom(a, region, 0.5)).ok
    assert not validate_psi_atom(space, 0, PsiAtom(2 * a, region, 0.5)).ok


def test_ball_atom_on_inner_ball_of_a_cube():
    space = metric_cloud(np.random.default_rng(8), 64, "line")
    adj = euclidean_shifted_grids(space)
    x = 20
    r = float(np.sort(space.dist[x])[6])
    atom = _ball_atom(space, x, r, 0.5)
    t, simple, c = ball_atom_to_dyadic(space, adj, atom)
    ref = cover_ball(adj, x, r)
    mu_q = space.weights[list(ref.members)].sum()
    mu_b = space.weights[atom.support(space)].sum()
    assert c == pytest.approx((mu_q / mu_b) ** 2)
    ms, filt = system_to_filtration(adj.systems[t])
    from martpara.atomic import validate_simple_atom

    assert validate_simple_atom(ms, filt, simple).ok
    assert np.allclose(c * simple.values, atom.values)


def test_whole_space_atom_goes_to_root():
    space = metric_cloud(np.random.default_rng(9), 32, "line")
    adj = euclidean_shifted_grids(space)
    atom = _ball_atom(space, 0, 5.0, 1.0)
    t, simple, c = ball_atom_to_dyadic(space, adj, atom)
    assert len(simple.block) == 32 and c == pytest.approx(1.0)


def test_point_ball_gets_smallest_cube():
    space = metric_cloud(np.random.default_rng(9), 32, "line")
    adj = euclidean_shifted_grids(space)
    ref = cover_ball(adj, 7, 1e-12)
    assert ref.members == (7,) and ref.diameter == 0.0


def test_dyadic_atom_round_trip():
    rng = np.random.default_rng(12)
    space = metric_cloud(rng, 80, "line", 8.0)
    system = build_dyadic_system(space, 1 / 12)
    ms, filt = system_to_filtration(system)
    for _ in range(20):
        atom = random_atom(rng, ms, filt, 0.5, math.inf)
        ball, c = dyadic_atom_to_ball(space, system, atom)
        assert validate_ball_atom(space, ball).ok
        assert np.allclose(c * ball.values, atom.values)
        assert c >= 1.0


def test_dyadic_atom_needs_mean_zero():
    space = metric_cloud(np.random.default_rng(1), 16, "line")
    system = build_dyadic_system(space, 1 / 12)
    from martpara.atomic import SimpleAtom

    with pytest.raises(ValueError, match="mean zero"):
        dyadic_atom_to_ball(space, system, SimpleAtom(np.ones(16), system.k_min, tuple(range(16))))


def _line8(n=64, seed=0):
    space = metric_cloud(np.random.default_rng(seed), n, "line", 8.0)
    return space, build_dyadic_system(space, 1 / 12), BasePointContext(space, 0)


@pytest.mark.parametrize("p", [1.0, 0.5])
def test_multiplier_constants(p):
    space, _, ctx = _line8()
    assert multiplier_check(space, ctx, np.zeros(space.n), p) == (0.0, 0.0)
    prof = decay_profile(space, 0, p)
    assert multiplier_check(space, ctx, prof, p)[0] == pytest.approx(1.0)
    assert multiplier_check(space, ctx, np.ones(space.n), p)[0] == pytest.approx(float(np.max(1 / prof)))


@pytest.mark.parametrize("p", [1.0, 0.5])
def test_multiplier_identity_and_zero(p):
    space, system, ctx = _line8()
    g = np.sin(space.coords[:, 0]) + 2
    assert multiplier_inequality(space, system, ctx, g, np.ones(space.n), p) == pytest.approx(0.5)
    assert multiplier_inequality(space, system, ctx, g, np.zeros(space.n), p) == 0.0


def test_single_system_reduces_to_paraproducts():
    rng = np.random.default_rng(2)
    space = metric_cloud(rng, 48, "line")
    full = euclidean_shifted_grids(space)
    adj = AdjacentSystems(space, full.systems[:1], full.C)
    f = rng.standard_normal(48)
    f -= f.mean()
    g = rng.standard_normal(48)
    res = pi_f_operators(space, adj, f, g)
    ms, filt = system_to_filtration(adj.systems[0])
    for got, want in zip(res, paraproducts(ms, filt, f, g)):
        assert np.allclose(got, want, atol=1e-12)


def test_single_ball_atom_routes_once():
    space = metric_cloud(np.random.default_rng(3), 48, "line")
    adj = euclidean_shifted_grids(space)
    atom = _ball_atom(space, 10, float(np.sort(space.dist[10])[5]), 1.0)
    res = pi_f_operators(space, adj, [(1.0, atom)], np.ones(48))
    assert len(res.routes) == 1
    assert sum(bool(np.any(part)) for part in res.parts) == 1


@given(st.integers(0, 2**32 - 1), st.sampled_from([1.0, 0.5]))
@settings(max_examples=10)
def test_pi_f_identity(seed, p):
    rng = np.random.default_rng(seed)
    space = metric_cloud(rng, 40, "line")
    adj = euclidean_shifted_grids(space)
    f = rng.standard_normal(40)
    f -= np.dot(space.weights, f) / space.weights.sum()
    g = rng.standard_normal(40)
    terms = ball_decomposition(space, adj, f, p)
    assert all(validate_ball_atom(space, a).ok for _, a in terms)
    res = pi_f_operators(space, adj, terms, g, p)
    scale = 1 + np.max(np.abs(f)) * np.max(np.abs(g))
    assert np.max(np.abs(res.pi1 + res.pi2 + res.pi3 - f * g)) <= 1e-12 * scale


def test_pi_f_dimension_error():
    space = metric_cloud(np.random.default_rng(3), 10, "line")
    adj = euclidean_shifted_grids(space)
    with pytest.raises(ValueError, match="dimension"):
        pi_f_operators(space, adj, np.zeros(10), np.zeros(9))


def test_growth_identity_dilation():
    space = _line(np.arange(32) / 4, np.full(32, 0.25))
    rep = ball_integral_growth_check(space, 0, 0.5, 10, 1.3, 1.0)
    assert rep.lhs == pytest.approx(1.0, abs=1e-12)
    assert rep.rhs == pytest.approx(rep.lhs, abs=1e-12)


@pytest.mark.parametrize("p", [0.5, 0.99])
def test_growth_doubling_is_finite(p):
    space = _line(np.arange(32) / 4, np.full(32, 0.25))
    rep = ball_integral_growth_check(space, 0, p, 10, 1.3, 2.0)
    assert 1.0 <= rep.rhs < 10.0


def test_growth_needs_small_p():
    space = _line([0.0, 1.0])
    with pytest.raises(ValueError):
        ball_integral_growth_check(space, 0, 1.0, 0, 1.0, 2.0)


@pytest.mark.parametrize("C_mu", [1.0, 2.0, 3.5])
def test_weight_bound(C_mu):
    space = metric_cloud(np.random.default_rng(0), 50, "line", 8.0)
    assert weight_bound_ratio(space, 0, C_mu) <= 1.0


def test_indicator_norm_matches_luxembourg():
    space = _line(np.arange(5) / 5, np.ones(5))
    ind = np.array([0, 1.0, 1.0, 0, 0])
    assert indicator_norm(space, 0, 1.0, [1, 2]) == luxembourg_norm(space.measure_space(), musielak_psi(space, 0, 1.0), ind)
