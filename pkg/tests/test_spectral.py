import numpy as np
import pytest
from hypothesis import given, strategies as st

from mhdjump.spectral import (
    Grid,
    MhdState,
    SpectralVectorField,
    curl,
    curl_curl,
    divergence,
    divergence_residual,
    forward_transform,
    gradient,
    inner_product,
    l2_norm_parseval,
    leray_project,
    make_grid,
    random_state,
    random_vector_field,
    resample,
    rough_state,
    smooth_state,
    taylor_green_mhd,
)

seeds = st.integers(0, 2**32 - 1)


@pytest.mark.parametrize("dim,n,length", [(1, 16, 1.0), (4, 16, 1.0), (2, 7, 1.0), (2, 6, 1.0), (2, 16, 0.0), (2, 16, -1.0)])
def test_grid_rejects_bad_parameters(dim, n, length):
    with pytest.raises(ValueError):
        Grid(dim, n, length)


def test_sine_has_expected_coefficient():
    grid = make_grid(2, 16)
    x1, _ = grid.coordinates()
    f = forward_transform(np.sin(x1), grid)
    expected = np.zeros(grid.shape, complex)
    expected[grid.mode_slot((1, 0))] = -0.5j
    expected[grid.mode_slot((-1, 0))] = 0.5j
    np.testing.assert_allclose(f.coeffs[0], expected, atol=1e-14)


def test_constant_maps_to_mean_mode():
    grid = make_grid(3, 8)
    f = forward_transform(np.full(grid.shape, 2.5), grid)
    assert f.coeffs[0][(0, 0, 0)] == pytest.approx(2.5)
    assert np.sum(np.abs(f.coeffs)) == pytest.approx(2.5)


def test_transform_rejects_bad_input():
    grid = make_grid(2, 16)
    with pytest.raises(ValueError):
        forward_transform(np.zeros((3, 3)), grid)
    with pytest.raises(ValueError):
        forward_transform(np.zeros(grid.shape, complex), grid)


def test_boxed_grid_derivative_uses_physical_wavenumbers():
    grid = make_grid(2, 16, box_length=1.0)
    x1, _ = grid.coordinates()
    f = forward_transform(np.sin(2 * np.pi * x1), grid)
    g = gradient(f).to_physical()
    np.testing.assert_allclose(g[0], 2 * np.pi * np.cos(2 * np.pi * x1), atol=1e-12)
    np.testing.assert_allclose(g[1], 0, atol=1e-12)


@given(seed=seeds)
def test_parseval_matches_quadrature(seed):
    grid = make_grid(2, 16)
    samples = np.random.default_rng(seed).standard_normal((2,) + grid.shape)
    f = forward_transform(samples, grid)
    assert l2_norm_parseval(f) ** 2 == pytest.approx(np.sum(samples**2) * grid.cell_volume, rel=1e-12)


@given(seed=seeds)
def test_round_trip_and_hermitian(seed):
    grid = make_grid(3, 8)
    samples = np.random.default_rng(seed).standard_normal((3,) + grid.shape)
    f = forward_transform(samples, grid)
    assert f.is_hermitian()
    np.testing.assert_allclose(f.to_physical(), samples, atol=1e-13)


@given(seed=seeds)
def test_leray_projection_idempotent_and_solenoidal(grid, seed):
    f = random_vector_field(grid, np.random.default_rng(seed), div_free=False)
    p = leray_project(f)
    np.testing.assert_allclose(leray_project(p).coeffs, p.coeffs, atol=1e-14 * np.abs(p.coeffs).max())
    assert divergence_residual(p) < 1e-13


@given(seed=seeds)
def test_leray_removes_exactly_the_gradient_part(seed):
    grid = make_grid(2, 16)
    rng = np.random.default_rng(seed)
    w = random_vector_field(grid, rng)
    phi = random_vector_field(grid, rng, div_free=False).coeffs[:1]
    g = gradient(SpectralVectorField(grid, phi))
    np.testing.assert_allclose(leray_project(w + g).coeffs, w.coeffs, atol=1e-12)
    assert abs(inner_product(w, g)) < 1e-10 * l2_norm_parseval(w) * l2_norm_parseval(g)


def test_curl_curl_of_divergence_free_is_minus_laplacian(grid, rng):
    f = random_vector_field(grid, rng)
    kk = np.sum(grid.k**2, axis=0)
    np.testing.assert_allclose(curl_curl(f).coeffs, kk * f.coeffs, atol=1e-12)


def test_curl_matches_symbolic_derivative():
    sp = pytest.importorskip("sympy")
    x, y = sp.symbols("x y")
    f1 = sp.sin(2 * y) * sp.cos(x)
    f2 = sp.cos(3 * x) + sp.sin(x + y)
    w = sp.diff(f2, x) - sp.diff(f1, y)
    grid = make_grid(2, 32)
    X, Y = grid.coordinates()
    num = sp.lambdify((x, y), [f1, f2], "numpy")
    samples = np.stack([np.broadcast_to(v, grid.shape) for v in num(X, Y)])
    c = curl(forward_transform(samples, grid)).to_physical()[0]
    np.testing.assert_allclose(c, sp.lambdify((x, y), w, "numpy")(X, Y), atol=1e-12)


def test_divergence_of_gradient_free_field():
    grid = make_grid(2, 16)
    x1, x2 = grid.coordinates()
    f = forward_transform(np.stack([np.sin(x2), np.cos(x1)]), grid)
    assert np.max(np.abs(divergence(f).to_physical())) < 1e-14


def test_random_state_properties(grid, rng):
    u = random_state(grid, rng, amplitude=2.0)
    assert l2_norm_parseval(u) == pytest.approx(2.0)
    assert u.is_div_free(1e-14)
    assert np.all(u.mean_mode() == 0)
    assert u.velocity.is_hermitian() and u.magnetic.is_hermitian()


def test_rough_state_spectrum_slope():
    grid = make_grid(2, 64)
    u = rough_state(grid, np.random.default_rng(0), r=2.0)
    kk = np.sqrt(grid.k2)
    mags = np.sqrt(np.sum(np.abs(u.coeffs) ** 2, axis=(0, 1)))
    sel = (kk > 2) & (kk < 20) & grid.resolved_mask
    slope = np.polyfit(np.log(kk[sel]), np.log(mags[sel]), 1)[0]
    assert slope == pytest.approx(-1.01, abs=0.15)


def test_taylor_green_pair_is_divergence_free():
    u = taylor_green_mhd(make_grid(2, 16))
    assert u.is_div_free(1e-15)
    assert l2_norm_parseval(u.velocity) == pytest.approx(np.pi * np.sqrt(2), rel=1e-12)


def test_resample_pads_and_truncates(rng):
    coarse, fine = make_grid(2, 16), make_grid(2, 32)
    u = smooth_state(coarse, rng, k0=1.5)
    up = resample(u, fine)
    np.testing.assert_allclose(resample(up, coarse).coeffs, u.coeffs)
    assert l2_norm_parseval(up) == pytest.approx(l2_norm_parseval(u))


def test_state_grid_mismatch_raises(rng):
    a = MhdState.zeros(make_grid(2, 16))
    b = MhdState.zeros(make_grid(2, 32))
    with pytest.raises(ValueError):
        a + b
