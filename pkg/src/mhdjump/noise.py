"""Finite-activity compensated Poisson noise and its stochastic convolution.

A noise is a finite list of marks ``z`` with rates ``nu(z)`` and
divergence-free amplitude states ``xi(z)``, modulated in time by a
deterministic factor ``c(t)``:  ``xi(t, z) = c(t) xi(z)``.  Velocity-only
and magnetic-only marks realize the two independent measures ``N1``, ``N2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .norms import lp_norm
from .semigroup import heat_multiplier
from .spectral import Grid, MhdState

QUAD_PER_UNIT_TIME = 64


@dataclass(frozen=True)
class Modulation:
    """Deterministic time factor ``c(t)``; ``offset`` shifts its clock."""

    kind: str = "constant"
    amplitude: float = 1.0
    omega: float = 0.0
    rate: float = 0.0
    offset: float = 0.0

    def __post_init__(self):
        if self.kind not in ("constant", "cosine", "exponential"):
            raise ValueError(f"unknown modulation kind {self.kind!r}")

    def __call__(self, t):
        t = np.asarray(t, dtype=float) + self.offset
        if self.kind == "constant":
            return self.amplitude * np.ones_like(t)
        if self.kind == "cosine":
            return self.amplitude * (1.0 + np.cos(self.omega * t)) / 2.0
        return self.amplitude * np.exp(-self.rate * t)

    def shifted(self, tau: float) -> "Modulation":
        return replace(self, offset=self.offset + tau)


@dataclass(frozen=True, eq=False)
class JumpNoiseSpec:
    grid: Grid
    marks: tuple[str, ...]
    intensities: np.ndarray
    amplitudes: tuple[MhdState, ...]
    modulation: Modulation = field(default_factory=Modulation)
    seed: int = 0

    def __post_init__(self):
        marks = tuple(self.marks)
        rates = np.asarray(self.intensities, dtype=float).reshape(-1)
        amps = tuple(self.amplitudes)
        if len(marks) == 0 and (rates.size or amps):
            raise ValueError("intensities or amplitudes given for an empty mark set")
        if not (len(marks) == rates.size == len(amps)):
            raise ValueError("marks, intensities and amplitudes must have equal length")
        if np.any(rates < 0) or not np.all(np.isfinite(rates)):
            raise ValueError("intensities must be finite and nonnegative")
        for a in amps:
            if a.grid != self.grid:
                raise ValueError("amplitude grid does not match the noise grid")
        object.__setattr__(self, "marks", marks)
        object.__setattr__(self, "intensities", rates)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def zero(cls, grid: Grid, seed: int = 0) -> "JumpNoiseSpec":
        return cls(grid, (), np.zeros(0), (), seed=seed)

    @property
    def total_intensity(self) -> float:
        return float(np.sum(self.intensities))

    def drift(self) -> MhdState:
        """``sum_z nu(z) xi(z)``, the compensator rate before modulation."""
        out = MhdState.zeros(self.grid)
        for rate, amp in zip(self.intensities, self.amplitudes):
            out = out + amp * rate
        return out

    def integrability(self, r: float, T: float) -> float:
        """``int_0^T sum_z ||xi(s, z)||_r^2 nu(z) ds``; must be finite."""
        s = np.linspace(0.0, T, 257)
        c2 = float(np.trapezoid(self.modulation(s) ** 2, s))
        return c2 * float(sum(lp_norm(a, r) ** 2 * nu for a, nu in zip(self.amplitudes, self.intensities)))

    def shifted(self, tau: float) -> "JumpNoiseSpec":
        return replace(self, modulation=self.modulation.shifted(tau))


@dataclass(frozen=True, eq=False)
class JumpPath:
    times: np.ndarray
    marks: np.ndarray
    horizon: float

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        marks = np.asarray(self.marks, dtype=int)
        if times.shape != marks.shape:
            raise ValueError("times and marks differ in length")
        if np.any(np.diff(times) < 0):
            raise ValueError("jump times must be ordered")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "marks", marks)

    def __len__(self):
        return len(self.times)

    def counts(self, n_marks: int) -> np.ndarray:
        return np.bincount(self.marks, minlength=n_marks)


def sample_path(spec: JumpNoiseSpec, T: float, seed) -> JumpPath:
    """Poisson(lambda T) event count, uniform ordered times, marks i.i.d. ~ nu/lambda."""
    if T <= 0:
        raise ValueError(f"horizon must be positive, got {T}")
    rng = np.random.default_rng(seed)
    lam = spec.total_intensity
    if lam == 0:
        return JumpPath(np.zeros(0), np.zeros(0, dtype=int), T)
    count = rng.poisson(lam * T)
    times = np.sort(rng.uniform(0.0, T, size=count))
    marks = rng.choice(len(spec.marks), size=count, p=spec.intensities / lam)
    return JumpPath(times, marks, T)


def ensemble_seeds(seed: int, count: int) -> list[np.random.SeedSequence]:
    """Independent child streams for an ensemble of paths."""
    return np.random.SeedSequence(seed).spawn(count)


def shift_noise(spec: JumpNoiseSpec, path: JumpPath, tau: float) -> JumpPath:
    """Events after ``tau`` on the clock restarted at ``tau``."""
    if not 0 <= tau <= path.horizon:
        raise ValueError(f"shift {tau} outside [0, {path.horizon}]")
    keep = path.times > tau
    return JumpPath(path.times[keep] - tau, path.marks[keep], path.horizon - tau)


def _midpoints(a: float, b: float, per_unit: int) -> tuple[np.ndarray, float]:
    m = max(1, int(np.ceil(per_unit * (b - a) - 1e-9)))
    h = (b - a) / m
    return a + h * (np.arange(m) + 0.5), h


def compensator_weight(spec: JumpNoiseSpec, a: float, b: float, per_unit: int = QUAD_PER_UNIT_TIME) -> float:
    """Composite midpoint value of ``int_a^b c(s) ds``."""
    if b <= a:
        return 0.0
    s, h = _midpoints(a, b, per_unit)
    return float(h * np.sum(spec.modulation(s)))


def compensated_integral(spec: JumpNoiseSpec, path: JumpPath, T: float) -> MhdState:
    """``sum_i xi(t_i, z_i) - int_0^T sum_z xi(s, z) nu(z) ds``."""
    if len(path) and (path.times[0] < 0 or path.times[-1] > T):
        raise ValueError("jump events outside [0, T]")
    out = MhdState.zeros(spec.grid)
    if not spec.marks:
        return out
    weights = -spec.intensities * compensator_weight(spec, 0.0, T)
    if len(path):
        np.add.at(weights, path.marks, spec.modulation(path.times))
    for w, amp in zip(weights, spec.amplitudes):
        out = out + amp * w
    return out


def compensator_increment(spec: JumpNoiseSpec, a: float, b: float, per_unit: int = QUAD_PER_UNIT_TIME) -> MhdState:
    """``int_a^b S(b - s) c(s) D ds`` with ``D = sum nu xi``, composite midpoint in ``s``."""
    if b <= a or not spec.marks:
        return MhdState.zeros(spec.grid)
    s, h = _midpoints(a, b, per_unit)
    c = spec.modulation(s)
    k2 = spec.grid.k2
    mult = h * np.sum(c[:, None] * np.exp(-k2.reshape(1, -1) * (b - s)[:, None]), axis=0).reshape(k2.shape)
    return MhdState(spec.grid, spec.drift().coeffs * mult)


def compensator_quadrature_error(spec: JumpNoiseSpec, t_grid, per_unit: int = QUAD_PER_UNIT_TIME) -> float:
    """Largest coefficient change of the compensator pieces under doubled resolution."""
    t_grid = np.asarray(t_grid, dtype=float)
    err = 0.0
    for a, b in zip(t_grid[:-1], t_grid[1:]):
        lo = compensator_increment(spec, a, b, per_unit)
        hi = compensator_increment(spec, a, b, 2 * per_unit)
        err = max(err, float(np.max(np.abs(lo.coeffs - hi.coeffs))) if spec.marks else 0.0)
    return err


def merge_jump_times(t_grid, path: JumpPath, atol: float = 1e-12) -> np.ndarray:
    """Union of ``t_grid`` and the jump times, sorted, near-duplicates removed."""
    pts = np.sort(np.concatenate([np.asarray(t_grid, dtype=float), path.times]))
    keep = np.concatenate([[True], np.diff(pts) > atol])
    return pts[keep]


def jump_increments(spec: JumpNoiseSpec, path: JumpPath, times: np.ndarray, atol: float = 1e-12):
    """Per grid index, the list of jump amplitudes ``c(t_i) xi(z_i)`` landing there."""
    out: dict[int, list[MhdState]] = {}
    if not len(path):
        return out
    idx = np.searchsorted(times, path.times - atol)
    for i, t, z in zip(idx, path.times, path.marks):
        if i >= len(times) or abs(times[i] - t) > 1e-9:
            raise ValueError(f"jump at t={t} is not a grid point")
        out.setdefault(int(i), []).append(spec.amplitudes[z] * float(spec.modulation(t)))
    return out


def stochastic_convolution(spec: JumpNoiseSpec, path: JumpPath, t_grid, per_unit: int = QUAD_PER_UNIT_TIME) -> list[MhdState]:
    """``Z(t) = sum_{t_i <= t} S(t - t_i) xi(t_i, z_i) - int_0^t S(t - s) sum_z xi(s, z) nu(z) ds``.

    Evaluated recursively, ``Z(b) = S(b - a) Z(a) + jumps(b) - compensator(a, b)``,
    on the union of ``t_grid`` and the jump times; values are returned at
    ``t_grid`` only.  Values at a jump time include that jump.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be strictly increasing")
    if len(t_grid) and (t_grid[0] < 0 or t_grid[-1] > path.horizon + 1e-12):
        raise ValueError("t_grid leaves the path horizon")
    t_end = t_grid[-1] if len(t_grid) else 0.0
    sel = path.times <= t_end + 1e-12
    sub = JumpPath(path.times[sel], path.marks[sel], path.horizon)
    times = merge_jump_times(np.concatenate([[0.0], t_grid]), sub)
    kicks = jump_increments(spec, sub, times)
    z = MhdState.zeros(spec.grid)
    for j in kicks.get(0, []):
        z = z + j
    values = {0: z}
    for i in range(1, len(times)):
        a, b = times[i - 1], times[i]
        z = MhdState(spec.grid, z.coeffs * heat_multiplier(spec.grid, b - a)) - compensator_increment(spec, a, b, per_unit)
        for j in kicks.get(i, []):
            z = z + j
        values[i] = z
    pos = np.searchsorted(times, t_grid - 1e-12)
    return [values[int(i)] for i in pos]
