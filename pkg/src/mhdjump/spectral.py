"""Periodic-torus grids, Fourier transforms and the basic differential operators.

Coefficients are stored in numpy's FFT ordering and normalized so that

    u(x) = sum_k  u_hat[k] exp(i k.x),      u_hat = fftn(u) / N**d,

i.e. a constant field ``c`` has ``u_hat[0] = c`` and ``sin(x1)`` has
``-i/2`` at ``k = (1, 0)`` and ``+i/2`` at ``k = (-1, 0)``.  With this
convention Parseval reads ``int |u|^2 dx = L**d * sum |u_hat|^2``.

First derivatives use wavevectors with the Nyquist component zeroed (the
Nyquist mode of a real field has no resolvable derivative); the Laplacian
uses the full ``|k|^2``.  Evolved fields carry no mean and no Nyquist content,
so the two conventions never disagree on them.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class Grid:
    """Uniform grid on the torus ``[0, L)^d`` with ``n`` points per axis."""

    dim: int
    n: int
    box_length: float = TWO_PI

    def __post_init__(self):
        if isinstance(self.dim, bool) or int(self.dim) != self.dim or self.dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {self.dim!r}")
        if isinstance(self.n, bool) or int(self.n) != self.n:
            raise ValueError(f"n must be an integer, got {self.n!r}")
        if self.n < 8 or self.n % 2:
            raise ValueError(f"n must be even and >= 8, got {self.n}")
        if not np.isfinite(self.box_length) or self.box_length <= 0:
            raise ValueError(f"box_length must be positive, got {self.box_length!r}")
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "box_length", float(self.box_length))

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def spacing(self) -> float:
        return self.box_length / self.n

    @property
    def volume(self) -> float:
        return self.box_length**self.dim

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    @property
    def scale(self) -> float:
        """Physical wavenumber of the integer mode 1."""
        return TWO_PI / self.box_length

    @cached_property
    def mode_index(self) -> np.ndarray:
        """Integer wavenumbers of one axis in FFT order, Nyquist stored as ``+n/2``."""
        m = np.fft.fftfreq(self.n, 1.0 / self.n).astype(int)
        m[self.n // 2] = self.n // 2
        return m

    @property
    def wavenumbers_1d(self) -> np.ndarray:
        """Sorted integer wavenumbers ``-n/2+1, ..., n/2``."""
        return np.sort(self.mode_index)

    @cached_property
    def integer_modes(self) -> np.ndarray:
        """Integer wavevectors, shape ``(d, n, ..., n)``."""
        return np.stack(np.meshgrid(*([self.mode_index] * self.dim), indexing="ij"))

    @cached_property
    def k(self) -> np.ndarray:
        """Derivative wavevectors (Nyquist components zeroed)."""
        m = self.integer_modes.astype(float)
        m[np.abs(self.integer_modes) == self.n // 2] = 0.0
        return self.scale * m

    @cached_property
    def k2(self) -> np.ndarray:
        """``|k|^2`` including the Nyquist planes."""
        return (self.scale**2) * np.sum(self.integer_modes.astype(float) ** 2, axis=0)

    @cached_property
    def k2_safe(self) -> np.ndarray:
        """``k . k`` on derivative wavevectors with the zeros replaced by 1."""
        kk = np.sum(self.k**2, axis=0)
        kk[kk == 0] = 1.0
        return kk

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """Two-thirds rule: keep modes with every ``|m_axis| <= n/3``."""
        return np.all(np.abs(self.integer_modes) <= self.n / 3.0, axis=0)

    @cached_property
    def resolved_mask(self) -> np.ndarray:
        """All modes except the mean and the Nyquist planes."""
        mask = np.all(np.abs(self.integer_modes) < self.n // 2, axis=0)
        mask[(0,) * self.dim] = False
        return mask

    def coordinates(self) -> np.ndarray:
        x = np.arange(self.n) * self.spacing
        return np.stack(np.meshgrid(*([x] * self.dim), indexing="ij"))

    def mode_slot(self, mode) -> tuple[int, ...]:
        """Array index of an integer wavevector such as ``(1, -2)``."""
        return tuple(int(m) % self.n for m in mode)


def make_grid(dim: int, n: int, box_length: float = TWO_PI) -> Grid:
    return Grid(dim, n, box_length)


def _fft(samples: np.ndarray, dim: int) -> np.ndarray:
    axes = tuple(range(-dim, 0))
    n_total = np.prod(samples.shape[-dim:])
    return np.fft.fftn(samples, axes=axes) / n_total


def _ifft(coeffs: np.ndarray, dim: int) -> np.ndarray:
    axes = tuple(range(-dim, 0))
    n_total = np.prod(coeffs.shape[-dim:])
    return np.fft.ifftn(coeffs * n_total, axes=axes).real


@dataclass(frozen=True, eq=False)
class SpectralVectorField:
    """Fourier coefficients of a real field, shape ``(ncomp, n, ..., n)``.

    Vector fields have ``ncomp == dim``; scalar results (divergence, 2D curl)
    are returned as one-component fields.
    """

    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=complex)
        if coeffs.shape[1:] != self.grid.shape:
            raise ValueError(f"coefficient shape {coeffs.shape} does not match grid {self.grid.shape}")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def ncomp(self) -> int:
        return self.coeffs.shape[0]

    def to_physical(self) -> np.ndarray:
        return _ifft(self.coeffs, self.grid.dim)

    def __add__(self, other):
        _check_same_grid(self.grid, other.grid)
        return SpectralVectorField(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other):
        _check_same_grid(self.grid, other.grid)
        return SpectralVectorField(self.grid, self.coeffs - other.coeffs)

    def __mul__(self, scalar):
        return SpectralVectorField(self.grid, self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return SpectralVectorField(self.grid, -self.coeffs)

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        flipped = np.conj(self.coeffs)
        for ax in range(1, self.grid.dim + 1):
            flipped = np.roll(np.flip(flipped, axis=ax), 1, axis=ax)
        scale = max(np.max(np.abs(self.coeffs)), 1e-300)
        return bool(np.max(np.abs(self.coeffs - flipped)) <= tol * scale)

    def is_div_free(self, tol: float = 1e-12) -> bool:
        return divergence_residual(self) <= tol


@dataclass(frozen=True, eq=False)
class MhdState:
    """The pair ``u = (v, H)``; ``coeffs`` has shape ``(2, d, n, ..., n)``."""

    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=complex)
        expected = (2, self.grid.dim) + self.grid.shape
        if coeffs.shape != expected:
            raise ValueError(f"state shape {coeffs.shape} != {expected}")
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def from_fields(cls, velocity: SpectralVectorField, magnetic: SpectralVectorField) -> "MhdState":
        _check_same_grid(velocity.grid, magnetic.grid)
        return cls(velocity.grid, np.stack([velocity.coeffs, magnetic.coeffs]))

    @classmethod
    def zeros(cls, grid: Grid) -> "MhdState":
        return cls(grid, np.zeros((2, grid.dim) + grid.shape, dtype=complex))

    @classmethod
    def from_physical(cls, grid: Grid, samples: np.ndarray) -> "MhdState":
        samples = np.asarray(samples, dtype=float)
        if samples.shape != (2, grid.dim) + grid.shape:
            raise ValueError(f"sample shape {samples.shape} does not match grid")
        return cls(grid, _fft(samples, grid.dim))

    @property
    def velocity(self) -> SpectralVectorField:
        return SpectralVectorField(self.grid, self.coeffs[0])

    @property
    def magnetic(self) -> SpectralVectorField:
        return SpectralVectorField(self.grid, self.coeffs[1])

    def to_physical(self) -> np.ndarray:
        return _ifft(self.coeffs, self.grid.dim)

    def __add__(self, other):
        _check_same_grid(self.grid, other.grid)
        return MhdState(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other):
        _check_same_grid(self.grid, other.grid)
        return MhdState(self.grid, self.coeffs - other.coeffs)

    def __mul__(self, scalar):
        return MhdState(self.grid, self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return MhdState(self.grid, -self.coeffs)

    def mean_mode(self) -> np.ndarray:
        return self.coeffs[(slice(None), slice(None)) + (0,) * self.grid.dim]

    def is_div_free(self, tol: float = 1e-12) -> bool:
        return divergence_residual(self) <= tol

    def coeff_norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.coeffs) ** 2)))


def _check_same_grid(a: Grid, b: Grid):
    if a != b:
        raise ValueError(f"grid mismatch: {a} vs {b}")


# transforms -----------------------------------------------------------------


def forward_transform(samples: np.ndarray, grid: Grid) -> SpectralVectorField:
    """Real samples ``(ncomp, n, ..., n)`` (or a bare scalar array) to coefficients."""
    samples = np.asarray(samples)
    if np.iscomplexobj(samples):
        raise ValueError("samples must be real")
    if samples.shape == grid.shape:
        samples = samples[None]
    if samples.ndim != grid.dim + 1 or samples.shape[1:] != grid.shape:
        raise ValueError(f"sample shape {samples.shape} does not match grid shape {grid.shape}")
    return SpectralVectorField(grid, _fft(samples.astype(float), grid.dim))


def inverse_transform(field: SpectralVectorField) -> np.ndarray:
    return field.to_physical()


# operators on raw coefficient arrays; the last ``dim`` axes are spatial and the
# axis just before them is the vector component.


def _div(coeffs: np.ndarray, grid: Grid) -> np.ndarray:
    return 1j * np.sum(grid.k * coeffs, axis=-grid.dim - 1)


def _project(coeffs: np.ndarray, grid: Grid) -> np.ndarray:
    kdotf = np.sum(grid.k * coeffs, axis=-grid.dim - 1, keepdims=True)
    return coeffs - grid.k * (kdotf / grid.k2_safe)


def _grad_scalar(coeffs: np.ndarray, grid: Grid) -> np.ndarray:
    """Gradient of scalar coefficients (..., n, ..., n) -> (..., d, n, ..., n)."""
    return 1j * grid.k * coeffs[(Ellipsis, None) + (slice(None),) * grid.dim]


def _curl(coeffs: np.ndarray, grid: Grid) -> np.ndarray:
    k = grid.k
    if grid.dim == 2:
        return 1j * (k[0] * coeffs[..., 1, :, :] - k[1] * coeffs[..., 0, :, :])[..., None, :, :]
    c = coeffs
    return 1j * np.stack(
        [
            k[1] * c[..., 2, :, :, :] - k[2] * c[..., 1, :, :, :],
            k[2] * c[..., 0, :, :, :] - k[0] * c[..., 2, :, :, :],
            k[0] * c[..., 1, :, :, :] - k[1] * c[..., 0, :, :, :],
        ],
        axis=-4,
    )


def _curl_of_scalar_2d(coeffs: np.ndarray, grid: Grid) -> np.ndarray:
    """2D curl of a scalar ``w``: ``(d2 w, -d1 w)``; input (..., 1, n, n)."""
    w = coeffs[..., 0, :, :]
    return 1j * np.stack([grid.k[1] * w, -grid.k[0] * w], axis=-3)


def divergence(f: SpectralVectorField) -> SpectralVectorField:
    return SpectralVectorField(f.grid, _div(f.coeffs, f.grid)[None])


def gradient(phi: SpectralVectorField) -> SpectralVectorField:
    if phi.ncomp != 1:
        raise ValueError("gradient expects a one-component field")
    return SpectralVectorField(phi.grid, _grad_scalar(phi.coeffs[0], phi.grid))


def leray_project(f):
    """Helmholtz projection ``I - k k^T/|k|^2``; works on fields and states."""
    out = _project(f.coeffs, f.grid)
    return type(f)(f.grid, out)


def curl(f: SpectralVectorField) -> SpectralVectorField:
    """``ik x f``; in 2D the result is the scalar ``d1 f2 - d2 f1``."""
    if f.ncomp != f.grid.dim:
        raise ValueError("curl expects a vector field")
    return SpectralVectorField(f.grid, _curl(f.coeffs, f.grid))


def curl_curl(f: SpectralVectorField) -> SpectralVectorField:
    c = f.coeffs
    grid = f.grid
    if grid.dim == 2:
        return SpectralVectorField(grid, _curl_of_scalar_2d(_curl(c, grid), grid))
    return SpectralVectorField(grid, _curl(_curl(c, grid), grid))


def divergence_residual(f) -> float:
    """``max |k . f_hat| / (k_max * ||f_hat||)``; zero fields give 0."""
    grid = f.grid
    scale = np.sqrt(np.sum(np.abs(f.coeffs) ** 2))
    if scale == 0:
        return 0.0
    kmax = grid.scale * grid.n / 2
    return float(np.max(np.abs(_div(f.coeffs, grid))) / (kmax * scale))


def inner_product(f, g) -> float:
    """Real ``L^2`` inner product via Parseval."""
    _check_same_grid(f.grid, g.grid)
    return float(f.grid.volume * np.real(np.sum(f.coeffs * np.conj(g.coeffs))))


def l2_norm_parseval(f) -> float:
    return float(np.sqrt(f.grid.volume * np.sum(np.abs(f.coeffs) ** 2)))


def strip_unresolved(coeffs: np.ndarray, grid: Grid) -> np.ndarray:
    """Zero the mean mode and the Nyquist planes."""
    return coeffs * grid.resolved_mask


# random and analytic fields -------------------------------------------------

Spectrum = Callable[[np.ndarray], np.ndarray]


def _physical_wavenumber(grid: Grid) -> np.ndarray:
    return np.sqrt(grid.k2)


def random_state(
    grid: Grid,
    rng: np.random.Generator,
    spectrum: Spectrum | None = None,
    *,
    unit_modulus: bool = False,
    amplitude: float | None = None,
) -> MhdState:
    """Random real, divergence-free, mean-zero state.

    White noise is transformed, reshaped by ``spectrum(|k|)`` and projected.
    With ``unit_modulus`` every coefficient gets exactly the spectrum's
    magnitude before projection (random phases only).  ``amplitude`` rescales
    the result to that ``L^2`` norm.
    """
    noise = rng.standard_normal((2, grid.dim) + grid.shape)
    c = _fft(noise, grid.dim)
    if unit_modulus:
        mag = np.abs(c)
        c = np.where(mag > 0, c / np.where(mag > 0, mag, 1.0), 0.0)
    if spectrum is not None:
        kk = _physical_wavenumber(grid)
        safe = np.where(kk > 0, kk, 1.0)
        c = c * np.where(kk > 0, spectrum(safe), 0.0)
    c = strip_unresolved(_project(c, grid), grid)
    state = MhdState(grid, c)
    if amplitude is not None:
        norm = l2_norm_parseval(state)
        if norm > 0:
            state = state * (amplitude / norm)
    return state


def rough_state(grid: Grid, rng: np.random.Generator, r: float, eps: float = 0.01) -> MhdState:
    """Random-phase state with ``|u_hat(k)| ~ |k|^(-d/r - eps)``."""
    s = grid.dim / r + eps
    return random_state(grid, rng, lambda kk: kk ** (-s), unit_modulus=True)


def smooth_state(grid: Grid, rng: np.random.Generator, k0: float = 2.0, amplitude: float | None = None) -> MhdState:
    """Low-mode random state with a Gaussian envelope ``exp(-|k|^2 / (2 k0^2))``."""
    return random_state(grid, rng, lambda kk: np.exp(-(kk**2) / (2 * k0**2)), amplitude=amplitude)


def random_vector_field(grid: Grid, rng: np.random.Generator, spectrum: Spectrum | None = None, div_free=True):
    noise = rng.standard_normal((grid.dim,) + grid.shape)
    c = _fft(noise, grid.dim)
    if spectrum is not None:
        kk = _physical_wavenumber(grid)
        c = c * np.where(kk > 0, spectrum(np.where(kk > 0, kk, 1.0)), 0.0)
    if div_free:
        c = _project(c, grid)
    return SpectralVectorField(grid, strip_unresolved(c, grid))


def taylor_green_2d(grid: Grid, amplitude: float = 1.0, shift: float = 0.0) -> SpectralVectorField:
    """``(-cos x1 sin x2, sin x1 cos x2)`` with ``x1`` shifted by ``shift``."""
    if grid.dim != 2:
        raise ValueError("taylor_green_2d needs a 2D grid")
    x1, x2 = grid.coordinates() * grid.scale
    x1 = x1 + shift
    samples = amplitude * np.stack([-np.cos(x1) * np.sin(x2), np.sin(x1) * np.cos(x2)])
    return forward_transform(samples, grid)


def taylor_green_mhd(grid: Grid, amplitude: float = 1.0) -> MhdState:
    """``v = TG``, ``H = TG/2`` shifted by a quarter period in ``x1``.

    The unshifted pairing ``H = TG/2`` is an exact steady nonlinear balance
    (``B(u, u) = 0``); the shift makes the magnetic coupling active.
    """
    v = taylor_green_2d(grid, amplitude)
    h = taylor_green_2d(grid, 0.5 * amplitude, shift=np.pi / 2)
    return MhdState.from_fields(v, h)


def resample_coeffs(coeffs: np.ndarray, dim: int, n_to: int) -> np.ndarray:
    """Copy the modes strictly inside both Nyquist limits onto an ``n_to`` grid."""
    n_from = coeffs.shape[-1]
    lead = coeffs.shape[:-dim]
    out = np.zeros(lead + (n_to,) * dim, dtype=complex)
    half = min(n_to, n_from) // 2
    idx = np.r_[0:half, -half + 1:0]
    sel = (Ellipsis,) + np.ix_(*([idx] * dim))
    out[sel] = coeffs[sel]
    return out


def resample(state: MhdState, grid: Grid) -> MhdState:
    """Spectral interpolation or truncation onto another resolution.

    Only modes strictly inside both Nyquist limits are carried over, so a
    coarse field padded to a finer grid and truncated back is unchanged.
    """
    if grid.dim != state.grid.dim or grid.box_length != state.grid.box_length:
        raise ValueError("resample only changes the resolution")
    return MhdState(grid, resample_coeffs(state.coeffs, grid.dim, grid.n))
