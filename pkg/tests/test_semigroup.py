import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from mhdjump.semigroup import (
    OperatorKind,
    OperatorSpec,
    apply_fractional,
    apply_operator,
    apply_semigroup,
    heat_multiplier,
    loglog_slope,
    phi_multiplier,
    smoothing_bound_exponent,
    smoothing_probe,
)
from mhdjump.spectral import MhdState, make_grid, random_state, rough_state, taylor_green_mhd

times = st.floats(0.0, 1.0)


@given(t=times, s=times, seed=st.integers(0, 2**31))
def test_semigroup_law(t, s, seed):
    grid = make_grid(2, 16)
    spec = OperatorSpec(grid)
    u = random_state(grid, np.random.default_rng(seed))
    np.testing.assert_allclose(
        apply_semigroup(spec, t, apply_semigroup(spec, s, u)).coeffs,
        apply_semigroup(spec, t + s, u).coeffs,
        atol=1e-14,
    )


@given(t=times, alpha=st.floats(-1.0, 1.0), seed=st.integers(0, 2**31))
def test_fractional_powers_commute_with_semigroup(t, alpha, seed):
    grid = make_grid(3, 8)
    spec = OperatorSpec(grid)
    u = random_state(grid, np.random.default_rng(seed))
    lhs = apply_fractional(spec, alpha, apply_semigroup(spec, t, u))
    rhs = apply_semigroup(spec, t, apply_fractional(spec, alpha, u))
    np.testing.assert_allclose(lhs.coeffs, rhs.coeffs, atol=1e-13 * max(1.0, np.abs(lhs.coeffs).max()))


def test_half_powers_compose_to_operator(grid, rng):
    spec = OperatorSpec(grid)
    u = random_state(grid, rng)
    twice = apply_fractional(spec, 0.5, apply_fractional(spec, 0.5, u))
    np.testing.assert_allclose(twice.coeffs, apply_operator(spec, u).coeffs, atol=1e-11)
    back = apply_fractional(spec, -0.5, apply_fractional(spec, 0.5, u))
    np.testing.assert_allclose(back.coeffs, u.coeffs, atol=1e-14)


def test_operator_kinds_agree_on_divergence_free_states(grid, rng):
    u = random_state(grid, rng)
    ref = apply_operator(OperatorSpec(grid, OperatorKind.STOKES), u).coeffs
    for kind in (OperatorKind.CURL_CURL, OperatorKind.BLOCK):
        np.testing.assert_allclose(apply_operator(OperatorSpec(grid, kind), u).coeffs, ref, atol=1e-11)


def test_operator_rejects_compressible_input():
    grid = make_grid(2, 16)
    x1, _ = grid.coordinates()
    samples = np.zeros((2, 2) + grid.shape)
    samples[0, 0] = np.sin(x1)
    with pytest.raises(ValueError):
        apply_operator(OperatorSpec(grid), MhdState.from_physical(grid, samples))


def test_heat_decay_of_single_mode():
    grid = make_grid(2, 16)
    u = taylor_green_mhd(grid)
    out = apply_semigroup(OperatorSpec(grid), 0.3, u)
    np.testing.assert_allclose(out.coeffs, u.coeffs * np.exp(-2 * 0.3), atol=1e-15)


def test_negative_time_and_mean_mode_rejected():
    grid = make_grid(2, 16)
    spec = OperatorSpec(grid)
    u = MhdState.zeros(grid)
    with pytest.raises(ValueError):
        apply_semigroup(spec, -1e-3, u)
    c = u.coeffs.copy()
    c[0, 0, 0, 0] = 1.0
    with pytest.raises(ValueError):
        apply_fractional(spec, -0.5, MhdState(grid, c))


@pytest.mark.parametrize("h", [1e-4, 0.01, 0.5, 3.0])
def test_phi_multiplier_matches_quadrature(h):
    grid = make_grid(2, 8)
    phi = phi_multiplier(grid, h)
    for k2 in np.unique(grid.k2)[:6]:
        expected = quad(lambda s: np.exp(-k2 * s), 0, h)[0]
        assert phi[grid.k2 == k2][0] == pytest.approx(expected, rel=1e-10)
    assert np.all(heat_multiplier(grid, 0.0) == 1.0)


@pytest.mark.parametrize("d,r,p,n", [(2, 2.0, 4.0, 64), (3, 3.0, 9.0, 16)])
def test_smoothing_decay_is_no_faster_than_bound(d, r, p, n):
    grid = make_grid(d, n)
    u0 = rough_state(grid, np.random.default_rng(1), r)
    ts = np.geomspace(1e-3, 1e-1, 7)
    slope = loglog_slope(*zip(*smoothing_probe(r, p, u0, ts)))
    assert slope >= smoothing_bound_exponent(d, r, p) - 0.05
    assert slope < 0


def test_smoothing_probe_rejects_bad_exponents(rng):
    u = random_state(make_grid(2, 16), rng)
    with pytest.raises(ValueError):
        smoothing_probe(4.0, 2.0, u, [0.1])


def test_loglog_slope_of_power_law():
    t = np.geomspace(1e-3, 1, 10)
    assert loglog_slope(t, 3 * t**-0.7) == pytest.approx(-0.7)
