"""The block operator (Stokes, curl-curl), its heat semigroup and fractional powers.

On divergence-free torus fields every operator here is the Fourier
multiplier ``|k|^2``; ``curl_curl`` is nevertheless evaluated literally as
``curl(curl H)`` so the equivalence is checked rather than assumed.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .norms import lp_norm
from .spectral import Grid, MhdState, _curl, _curl_of_scalar_2d, _project, divergence_residual

DIV_TOL = 1e-10


class OperatorKind(str, enum.Enum):
    STOKES = "stokes"
    CURL_CURL = "curl_curl"
    BLOCK = "block"


@dataclass(frozen=True)
class OperatorSpec:
    grid: Grid
    kind: OperatorKind = OperatorKind.BLOCK

    def __post_init__(self):
        object.__setattr__(self, "kind", OperatorKind(self.kind))


def _require_div_free(u: MhdState):
    res = divergence_residual(u)
    if res > DIV_TOL:
        raise ValueError(f"input is not divergence-free (relative residual {res:.3e})")


def _stokes(c: np.ndarray, grid: Grid) -> np.ndarray:
    return _project(grid.k2 * c, grid)


def _curl_curl(c: np.ndarray, grid: Grid) -> np.ndarray:
    if grid.dim == 2:
        return _curl_of_scalar_2d(_curl(c, grid), grid)
    return _curl(_curl(c, grid), grid)


def apply_operator(spec: OperatorSpec, u: MhdState) -> MhdState:
    """``(A v, M H)`` for the block kind; a single kind acts on both components."""
    _require_div_free(u)
    grid = spec.grid
    c = u.coeffs
    if spec.kind is OperatorKind.STOKES:
        out = _stokes(c, grid)
    elif spec.kind is OperatorKind.CURL_CURL:
        out = _curl_curl(c, grid)
    else:
        out = np.stack([_stokes(c[0], grid), _curl_curl(c[1], grid)])
    return MhdState(grid, out)


def heat_multiplier(grid: Grid, t: float) -> np.ndarray:
    return np.exp(-grid.k2 * t)


def phi_multiplier(grid: Grid, h: float) -> np.ndarray:
    """``int_0^h exp(-|k|^2 s) ds = (1 - exp(-|k|^2 h)) / |k|^2`` (``h`` at k=0)."""
    k2 = grid.k2
    safe = np.where(k2 > 0, k2, 1.0)
    return np.where(k2 > 0, -np.expm1(-k2 * h) / safe, h)


def apply_semigroup(spec: OperatorSpec, t: float, u: MhdState) -> MhdState:
    if t < 0:
        raise ValueError(f"semigroup time must be nonnegative, got {t}")
    if t == 0:
        return MhdState(u.grid, u.coeffs.copy())
    return MhdState(u.grid, u.coeffs * heat_multiplier(spec.grid, t))


def fractional_multiplier(grid: Grid, alpha: float) -> np.ndarray:
    k2 = grid.k2
    safe = np.where(k2 > 0, k2, 1.0)
    out = safe**alpha
    out[(0,) * grid.dim] = 1.0 if alpha == 0 else 0.0
    return out


def apply_fractional(spec: OperatorSpec, alpha: float, u: MhdState, mean_tol: float = 1e-12) -> MhdState:
    """Multiplier ``|k|^(2 alpha)``; the mean mode is mapped to zero for ``alpha != 0``.

    Negative powers are undefined on the mean mode and raise if it carries
    more than ``mean_tol`` of the state's coefficient norm.
    """
    if alpha < 0:
        scale = max(u.coeff_norm(), 1e-300)
        if np.max(np.abs(u.mean_mode())) > mean_tol * scale:
            raise ValueError("negative fractional power needs a mean-zero state")
    return MhdState(u.grid, u.coeffs * fractional_multiplier(spec.grid, alpha))


def smoothing_bound_exponent(d: int, r: float, p: float) -> float:
    """Decay exponent ``-(d/2)(1/r - 1/p)`` of the ``L^r -> L^p`` smoothing bound."""
    return -(d / 2.0) * (1.0 / r - 1.0 / p)


def smoothing_probe(r: float, p: float, u0: MhdState, t_list) -> list[tuple[float, float]]:
    """Decay curve ``(t, ||S(t) u0||_p)`` for ``t`` in ``t_list``."""
    if not 1 < r <= p < np.inf:
        raise ValueError(f"need 1 < r <= p < inf, got r={r}, p={p}")
    spec = OperatorSpec(u0.grid)
    return [(float(t), lp_norm(apply_semigroup(spec, t, u0), p)) for t in t_list]


def loglog_slope(ts, values) -> float:
    """Least-squares slope of ``log values`` against ``log ts``."""
    x = np.log(np.asarray(ts, dtype=float))
    y = np.log(np.asarray(values, dtype=float))
    return float(np.polyfit(x, y, 1)[0])
