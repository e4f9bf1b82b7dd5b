"""MHD bilinear operator, trilinear form, two-thirds dealiasing and the A^{-1/2}B probes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .norms import lp_norm
from .semigroup import OperatorSpec, apply_fractional
from .spectral import (
    Grid,
    MhdState,
    SpectralVectorField,
    _check_same_grid,
    _fft,
    _ifft,
    _project,
    divergence_residual,
    forward_transform,
    resample_coeffs,
)

DIV_TOL = 1e-10


@dataclass
class BilinearResult:
    value: MhdState
    p_norm_estimates: dict | None = None


def dealias(samples: np.ndarray, grid: Grid) -> SpectralVectorField:
    """Transform a physical product field and zero every mode with ``|m_axis| > n/3``."""
    f = forward_transform(samples, grid)
    return SpectralVectorField(grid, f.coeffs * grid.dealias_mask)


def _gradient_physical(coeffs: np.ndarray, grid: Grid) -> np.ndarray:
    """``G[..., i, j] = d_j f_i`` in physical space; input (..., d, X)."""
    d = grid.dim
    spatial = (slice(None),) * d
    g = 1j * grid.k * coeffs[(Ellipsis, slice(None), None) + spatial]
    return _ifft(g, d)


def _advect(a: np.ndarray, grad_b: np.ndarray) -> np.ndarray:
    """``(a . grad) b`` with ``a`` (d, X) and ``grad_b`` (d_i, d_j, X)."""
    return np.einsum("j...,ij...->i...", a, grad_b)


def bilinear_B(u1: MhdState, u2: MhdState, dealias: bool = True) -> BilinearResult:
    """``B1 = P(H1.grad H2 - v1.grad v2)``, ``B2 = H1.grad v2 - v1.grad H2``.

    Products are formed on the physical grid from spectrally differentiated
    inputs.  With ``dealias`` the inputs and the products are truncated by the
    two-thirds rule, which makes the quadratic term alias-free.
    """
    _check_same_grid(u1.grid, u2.grid)
    grid = u1.grid
    d = grid.dim
    c1, c2 = u1.coeffs, u2.coeffs
    if dealias:
        c1 = c1 * grid.dealias_mask
        c2 = c2 * grid.dealias_mask
    a = _ifft(c1, d)
    g = _gradient_physical(c2, grid)
    v1, h1 = a[0], a[1]
    gv2, gh2 = g[0], g[1]
    terms = np.stack([_advect(h1, gh2) - _advect(v1, gv2), _advect(h1, gv2) - _advect(v1, gh2)])
    out = _fft(terms, d)
    if dealias:
        out = out * grid.dealias_mask
    out[0] = _project(out[0], grid)
    return BilinearResult(MhdState(grid, out))


def trilinear_b(u: SpectralVectorField, w: SpectralVectorField, v: SpectralVectorField) -> float:
    """``int (u . grad w) . v dx``, exact for trigonometric polynomials.

    ``u . grad w`` is formed on a grid refined by two so the product is
    alias-free, then paired with ``v`` through Parseval.  Nyquist modes of
    the inputs are dropped: they have no resolvable derivative.
    """
    grid = u.grid
    _check_same_grid(grid, w.grid)
    _check_same_grid(grid, v.grid)
    res = divergence_residual(u)
    if res > DIV_TOL:
        raise ValueError(f"first argument must be divergence-free (relative residual {res:.3e})")
    d = grid.dim
    m = 2 * grid.n
    fine = Grid(d, m, grid.box_length)
    uc = resample_coeffs(u.coeffs, d, m)
    wc = resample_coeffs(w.coeffs, d, m)
    vc = resample_coeffs(v.coeffs, d, m)
    prod = _fft(_advect(_ifft(uc, d), _gradient_physical(wc, fine)), d)
    return float(fine.volume * np.real(np.sum(prod * np.conj(vc))))


@dataclass
class ProbeRecord:
    lhs: float
    rhs_ratio: float


def _a_minus_half_norm(b: MhdState, p: float) -> float:
    return lp_norm(apply_fractional(OperatorSpec(b.grid), -0.5, b), p / 2.0)


def estimate_probe_A_half(u1: MhdState, u2: MhdState, p: float, dealias: bool = True) -> ProbeRecord:
    """``||A^{-1/2} B(u1, u2)||_{p/2}`` and its ratio to ``||u1||_p ||u2||_p``."""
    if not 2 < p < np.inf:
        raise ValueError(f"p must lie in (2, inf), got {p}")
    lhs = _a_minus_half_norm(bilinear_B(u1, u2, dealias=dealias).value, p)
    denom = lp_norm(u1, p) * lp_norm(u2, p)
    return ProbeRecord(lhs, lhs / denom if denom > 0 else 0.0)


def lipschitz_probe(u1: MhdState, u2: MhdState, p: float) -> ProbeRecord:
    """``||A^{-1/2}(B(u1,u1) - B(u2,u2))||_{p/2}`` over ``||u1-u2||_p (||u1||_p + ||u2||_p)``."""
    if not 2 < p < np.inf:
        raise ValueError(f"p must lie in (2, inf), got {p}")
    diff = bilinear_B(u1, u1).value - bilinear_B(u2, u2).value
    lhs = _a_minus_half_norm(diff, p)
    denom = lp_norm(u1 - u2, p) * (lp_norm(u1, p) + lp_norm(u2, p))
    return ProbeRecord(lhs, lhs / denom if denom > 0 else 0.0)


def energy_transfer(u: MhdState, dealias: bool = True) -> float:
    """``<B(u, u), u>`` in ``L^2``; zero for divergence-free ``u``."""
    b = bilinear_B(u, u, dealias=dealias).value
    return float(u.grid.volume * np.real(np.sum(b.coeffs * np.conj(u.coeffs))))
