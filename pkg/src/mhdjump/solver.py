"""Mild-solution integration: exponential Euler, the Picard map on a ball, 2D continuation.

Time stepping is the exponential Euler scheme

    u_{m+1} = S(h) u_m + phi(h) B(u_m, u_m) - compensator(t_m, t_{m+1}) + jumps(t_{m+1}),

with ``phi(h) = (1 - exp(-|k|^2 h)) / |k|^2``: the nonlinearity is frozen at
the left endpoint and the semigroup is integrated exactly.  The Picard map
uses the same quadrature of the Duhamel integral, so a Picard fixed point on
a time grid coincides with the stepped trajectory on that grid.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from .noise import (
    JumpNoiseSpec,
    JumpPath,
    compensator_increment,
    jump_increments,
    sample_path,
    shift_noise,
    stochastic_convolution,
)
from .nonlinearity import bilinear_B, trilinear_b
from .norms import (
    ExponentTriple,
    TrajectoryRecord,
    bochner_norm,
    bochner_norm_of_series,
    gradient_l2_squared,
    lp_norm,
)
from .semigroup import heat_multiplier, phi_multiplier
from .spectral import Grid, MhdState, SpectralVectorField, _project, l2_norm_parseval, smooth_state

log = logging.getLogger(__name__)

# Young's inequality constants for the 2D energy estimate, in the
# (1/2) d/dt ||Y||^2 form, given the Ladyzhenskaya constant c^4.
YOUNG_C1_FACTOR = 27.0 * 64.0
YOUNG_C2 = 16.0


class LocalSolveError(RuntimeError):
    def __init__(self, message: str, report: "LocalSolveReport"):
        super().__init__(message)
        self.report = report


class BlowUpError(RuntimeError):
    pass


@dataclass
class SolverConfig:
    exps: ExponentTriple
    dt: float
    T: float
    picard_tol: float = 1e-10
    picard_max_iter: int = 50
    ball_constant_K1: float = 1.0
    defensive_projection: bool = True
    blowup_threshold: float = 1e12

    def __post_init__(self):
        if self.dt <= 0 or self.T <= 0:
            raise ValueError("dt and T must be positive")
        if self.picard_tol <= 0 or self.picard_max_iter < 1:
            raise ValueError("picard_tol must be positive and picard_max_iter >= 1")
        if self.ball_constant_K1 <= 0:
            raise ValueError("ball_constant_K1 must be positive")


@dataclass
class LocalSolveReport:
    t_start: float = 0.0
    tau: float = 0.0
    N_tau: float = 0.0
    gate_threshold: float = 0.0
    halvings: int = 0
    contraction_ratios: list[float] = field(default_factory=list)
    iterations: int = 0
    final_difference: float = float("nan")
    converged: bool = False
    max_projection_correction: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


def time_grid(T: float, dt: float, jump_times=()) -> np.ndarray:
    """Uniform ``dt`` grid on ``[0, T]`` (last step may be short) with jump times inserted."""
    steps = int(np.ceil(T / dt - 1e-9))
    pts = np.minimum(np.arange(steps + 1) * dt, T)
    pts = np.concatenate([pts, np.asarray(jump_times, dtype=float)])
    pts = np.sort(pts)
    keep = np.concatenate([[True], np.diff(pts) > 1e-12])
    return pts[keep]


def _nonlinear_term(w: MhdState, defensive_projection: bool) -> tuple[MhdState, float]:
    b = bilinear_B(w, w).value
    if not defensive_projection:
        return b, 0.0
    projected = MhdState(b.grid, _project(b.coeffs, b.grid))
    scale = b.coeff_norm()
    corr = (b - projected).coeff_norm() / scale if scale > 0 else 0.0
    return projected, corr


def _duhamel(u0: MhdState, forcing_states, times, defensive_projection=True):
    """``G(t_m) = S(t_m) u0 + sum_j S(t_m - t_{j+1}) phi(h_j) B(w_j, w_j)``."""
    grid = u0.grid
    g = u0
    out = [g]
    worst = 0.0
    for m in range(len(times) - 1):
        h = times[m + 1] - times[m]
        b, corr = _nonlinear_term(forcing_states[m], defensive_projection)
        worst = max(worst, corr)
        g = MhdState(grid, g.coeffs * heat_multiplier(grid, h) + b.coeffs * phi_multiplier(grid, h))
        out.append(g)
    return out, worst


def gamma_map(Y: TrajectoryRecord, Z: TrajectoryRecord, u0: MhdState, cfg: SolverConfig) -> TrajectoryRecord:
    """``Gamma(Y)(t) = S(t) u0 + int_0^t S(t - s) B(Y + Z, Y + Z) ds`` on the shared grid."""
    if len(Y) != len(Z) or not np.allclose(Y.times, Z.times, rtol=0, atol=1e-12):
        raise ValueError("Y and Z must share one time grid")
    w = [y + z for y, z in zip(Y.states, Z.states)]
    states, corr = _duhamel(u0, w, Y.times, cfg.defensive_projection)
    return TrajectoryRecord(Y.times.copy(), states, metadata={"max_projection_correction": corr})


def _record_from(times, states, jump_flags=None) -> TrajectoryRecord:
    return TrajectoryRecord(np.asarray(times), list(states), jump_flags=jump_flags)


def linear_part(u0: MhdState, times) -> list[MhdState]:
    t0 = times[0]
    return [MhdState(u0.grid, u0.coeffs * heat_multiplier(u0.grid, t - t0)) for t in times]


def smallness_threshold(tau: float, exps: ExponentTriple, K1: float) -> float:
    """``(10 tau^(1/2 - d/(2r)) K1)^(-1)``."""
    return 1.0 / (10.0 * tau**exps.time_weight_exponent * K1)


def select_local_interval(u0: MhdState, Z: TrajectoryRecord, cfg: SolverConfig, report: LocalSolveReport) -> int:
    """Halve ``tau`` from the full horizon until the smallness gate passes.

    Returns the index of the grid time closing the local interval.  Each
    candidate is snapped down to a grid point; failure on the first step is
    an underflow.
    """
    times = Z.times
    exps = cfg.exps
    lin = _record_from(times, linear_part(u0, times))
    lin_norms = lin.norm_series(exps.p)
    z_norms = Z.norm_series(exps.p)
    tau = times[-1] - times[0]
    halvings = 0
    while True:
        m = int(np.searchsorted(times, times[0] + tau + 1e-12) - 1)
        if m < 1:
            report.halvings = halvings
            raise LocalSolveError("local interval underflow: smallness gate never passed", report)
        tau_m = times[m] - times[0]
        n_tau = bochner_norm_of_series(times[: m + 1], lin_norms[: m + 1], exps.q) + bochner_norm_of_series(
            times[: m + 1], z_norms[: m + 1], exps.q
        )
        thr = smallness_threshold(tau_m, exps, cfg.ball_constant_K1)
        report.tau, report.N_tau, report.gate_threshold = float(tau_m), float(n_tau), float(thr)
        if n_tau < thr:
            report.halvings = halvings
            return m
        tau = tau_m / 2.0
        halvings += 1


def _bochner_of_states(times, states, exps: ExponentTriple) -> float:
    return bochner_norm_of_series(times, [lp_norm(s, exps.p) for s in states], exps.q)


def picard_solve(u0: MhdState, Z: TrajectoryRecord, cfg: SolverConfig, initial_guess="zero", t_start: float = 0.0):
    """Fixed point of Gamma on the gated local interval.

    ``Z.times`` start at 0 (local clock).  ``initial_guess`` is ``"zero"``,
    ``"linear"`` (``S(.) u0``) or a list of states on the same grid.
    Returns the record of ``u = Y + Z`` on ``[0, tau]`` and the report.
    """
    report = LocalSolveReport(t_start=t_start)
    m = select_local_interval(u0, Z, cfg, report)
    times = Z.times[: m + 1]
    zs = Z.states[: m + 1]
    z_rec = _record_from(times, zs)
    if isinstance(initial_guess, str):
        if initial_guess == "zero":
            ys = [MhdState.zeros(u0.grid) for _ in times]
        elif initial_guess == "linear":
            ys = linear_part(u0, times)
        else:
            raise ValueError(f"unknown initial guess {initial_guess!r}")
    else:
        ys = list(initial_guess)[: m + 1]
    exps = cfg.exps
    prev_diff = None
    for it in range(1, cfg.picard_max_iter + 1):
        new = gamma_map(_record_from(times, ys), z_rec, u0, cfg)
        report.max_projection_correction = max(report.max_projection_correction, new.metadata["max_projection_correction"])
        diff = _bochner_of_states(times, [a - b for a, b in zip(new.states, ys)], exps)
        size = _bochner_of_states(times, new.states, exps)
        if prev_diff is not None and prev_diff > 0:
            report.contraction_ratios.append(diff / prev_diff)
        ys = new.states
        report.iterations = it
        report.final_difference = diff
        if not np.isfinite(diff):
            raise LocalSolveError("Picard iteration diverged", report)
        if diff < cfg.picard_tol * (1.0 + size):
            report.converged = True
            break
        prev_diff = diff
    if not report.converged:
        raise LocalSolveError(f"Picard iteration did not converge in {cfg.picard_max_iter} sweeps", report)
    log.debug("local solve t0=%.4g tau=%.4g iters=%d ratios=%s", t_start, report.tau, report.iterations, report.contraction_ratios)
    states = [y + z for y, z in zip(ys, zs)]
    flags = Z.jump_flags[: m + 1] if Z.jump_flags is not None else None
    rec = TrajectoryRecord(times.copy(), states, jump_flags=flags, metadata={"Y": ys})
    return rec, report


def step_exponential_euler(
    u: MhdState,
    dt: float,
    pending_jumps=(),
    compensator: MhdState | None = None,
    defensive_projection: bool = True,
    blowup_threshold: float = 1e12,
) -> MhdState:
    """One exponential Euler step, then the jumps landing at the step's end."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    grid = u.grid
    b, _ = _nonlinear_term(u, defensive_projection)
    c = u.coeffs * heat_multiplier(grid, dt) + b.coeffs * phi_multiplier(grid, dt)
    if compensator is not None:
        c = c - compensator.coeffs
    for j in pending_jumps:
        c = c + j.coeffs
    if defensive_projection:
        c = _project(c, grid)
    out = MhdState(grid, c)
    norm = l2_norm_parseval(out)
    if not np.isfinite(norm) or norm > blowup_threshold:
        raise BlowUpError(f"state norm {norm:.3e} exceeds {blowup_threshold:.1e}")
    return out


def integrate(u0: MhdState, cfg: SolverConfig, spec: JumpNoiseSpec | None = None, path: JumpPath | None = None) -> TrajectoryRecord:
    """Single-shot exponential Euler run on ``[0, T]`` with exact jump insertion."""
    if path is None:
        path = JumpPath(np.zeros(0), np.zeros(0, dtype=int), cfg.T)
    times = time_grid(cfg.T, cfg.dt, path.times)
    kicks = jump_increments(spec, path, times) if spec is not None else {}
    u = u0
    for j in kicks.get(0, []):
        u = u + j
    states = [u]
    flags = np.zeros(len(times), dtype=bool)
    flags[list(kicks)] = True
    for m in range(len(times) - 1):
        a, b = times[m], times[m + 1]
        comp = compensator_increment(spec, a, b) if spec is not None else None
        u = step_exponential_euler(u, b - a, kicks.get(m + 1, []), comp, cfg.defensive_projection, cfg.blowup_threshold)
        states.append(u)
    return TrajectoryRecord(times, states, jump_flags=flags)


def convolution_record(spec: JumpNoiseSpec, path: JumpPath, times) -> TrajectoryRecord:
    times = np.asarray(times, dtype=float)
    flags = np.isin(np.round(times, 12), np.round(path.times, 12))
    if spec.marks:
        states = stochastic_convolution(spec, path, times)
    else:
        states = [MhdState.zeros(spec.grid) for _ in times]
    return TrajectoryRecord(times, states, jump_flags=flags)


def solve_global_2d(u0: MhdState, spec: JumpNoiseSpec, cfg: SolverConfig, path: JumpPath | None = None) -> TrajectoryRecord:
    """Chain gated local Picard solves over ``[0, T]``.

    After each local interval the run restarts from the terminal state
    ``u(tau)`` with the noise shifted by ``tau``.  The returned record holds
    ``u`` on the global grid; ``metadata`` carries the local reports, the
    sampled path and the global convolution ``Z``.
    """
    if u0.grid.dim != 2 or not np.isclose(cfg.exps.r, 2.0):
        raise ValueError("global continuation needs d = 2 and r = 2")
    if path is None:
        path = sample_path(spec, cfg.T, spec.seed)
    times = time_grid(cfg.T, cfg.dt, path.times)
    reports: list[LocalSolveReport] = []
    states = [u0]
    t_start = 0.0
    u = u0
    while t_start < cfg.T - 1e-12:
        local_times = times[times >= t_start - 1e-12] - t_start
        local_path = shift_noise(spec, path, t_start)
        z_loc = convolution_record(spec.shifted(t_start), local_path, local_times)
        rec, report = picard_solve(u, z_loc, cfg, t_start=t_start)
        reports.append(report)
        states.extend(rec.states[1:])
        u = rec.states[-1]
        t_start = times[len(states) - 1]
    z_global = convolution_record(spec, path, times)
    return TrajectoryRecord(
        times,
        states,
        jump_flags=z_global.jump_flags,
        metadata={"reports": reports, "path": path, "Z": z_global},
    )


def measure_ball_constant(grid: Grid, exps: ExponentTriple, T: float, dt: float, seed: int = 0, samples: int = 8, safety: float = 2.0):
    """Empirical ``K1`` for ``||int S B(w, w)||_{L^q L^p} <= K1 tau^(1/2-d/2r) ||w||^2_{L^q L^p}``.

    Over random heat-flow trajectories ``w(t) = S(t) w0`` and windows
    ``tau = T, T/2, T/4, T/8`` the largest ratio is multiplied by ``safety``.
    """
    rng = np.random.default_rng(seed)
    times = time_grid(T, dt)
    ratios = []
    for _ in range(samples):
        w0 = smooth_state(grid, rng, k0=3.0, amplitude=1.0)
        w = linear_part(w0, times)
        d_states, _ = _duhamel(MhdState.zeros(grid), w, times)
        w_norm = np.array([lp_norm(s, exps.p) for s in w])
        d_norm = np.array([lp_norm(s, exps.p) for s in d_states])
        for frac in (1.0, 0.5, 0.25, 0.125):
            m = int(np.searchsorted(times, frac * T + 1e-12) - 1)
            if m < 1:
                continue
            tau = times[m]
            num = bochner_norm_of_series(times[: m + 1], d_norm[: m + 1], exps.q)
            den = tau**exps.time_weight_exponent * bochner_norm_of_series(times[: m + 1], w_norm[: m + 1], exps.q) ** 2
            ratios.append(num / den)
    return safety * max(ratios), ratios


@dataclass
class EnergyDiagnostics:
    times: np.ndarray
    energy: np.ndarray
    dissipation: np.ndarray
    couplings: np.ndarray
    transfer: np.ndarray
    z4: np.ndarray
    half_energy_rate: np.ndarray
    balance_residual: np.ndarray
    ladyzhenskaya_c4: float
    C1: float
    C2: float
    majorant: np.ndarray
    terminal_majorant: float
    bound_holds: bool
    nonincreasing: bool


def _cumtrapz(y, x):
    out = np.zeros_like(y, dtype=float)
    out[1:] = np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(x))
    return out


def gronwall_majorant(times, z4, e0: float, C1: float, C2: float) -> np.ndarray:
    """Solution of ``M' = 2 C1 z M + 2 C2 z``, ``M(0) = e0``, integrated exactly in ``I = int z``."""
    integral = _cumtrapz(np.asarray(z4, dtype=float), np.asarray(times, dtype=float))
    with np.errstate(over="ignore"):
        growth = np.exp(2.0 * C1 * integral)
    # M = e^{2 C1 I} (e0 + C2/C1 (1 - e^{-2 C1 I})) for piecewise-linear I.
    return growth * e0 + (C2 / C1) * (growth - 1.0)


def energy_diagnostics(rec: TrajectoryRecord, Z: TrajectoryRecord, tol: float = 1e-9) -> EnergyDiagnostics:
    """2D energy budget of ``Y = u - Z`` and the Gronwall bound on ``sup ||Y||_2^2``."""
    if rec.states[0].grid.dim != 2:
        raise ValueError("energy diagnostics are two-dimensional")
    times = rec.times
    ys = [u - z for u, z in zip(rec.states, Z.states)]
    energy = np.array([l2_norm_parseval(y) ** 2 for y in ys])
    diss = np.array([gradient_l2_squared(y) for y in ys])
    couplings = np.zeros((len(ys), 4))
    transfer = np.zeros(len(ys))
    mask = rec.states[0].grid.dealias_mask
    for i, (u, y, z) in enumerate(zip(rec.states, ys, Z.states)):
        # couplings of the two-thirds truncated fields: the scheme's B pairs exactly with these
        v, h, y1, y2, z1, z2 = (SpectralVectorField(f.grid, f.coeffs * mask) for f in
                                (u.velocity, u.magnetic, y.velocity, y.magnetic, z.velocity, z.magnetic))
        couplings[i] = (
            -trilinear_b(v, z1, y1),
            trilinear_b(h, z2, y1),
            -trilinear_b(v, z2, y2),
            trilinear_b(h, z1, y2),
        )
        b = bilinear_B(u, u).value
        transfer[i] = y.grid.volume * float(np.real(np.sum(b.coeffs * np.conj(y.coeffs))))
    z4 = np.array([lp_norm(z, 4.0) ** 4 for z in Z.states])
    rate = 0.5 * np.diff(energy) / np.diff(times)
    residual = rate - (-diss[:-1] + couplings[:-1].sum(axis=1))
    l4 = np.array([lp_norm(y, 4.0) ** 4 for y in ys])
    live = (energy > 0) & (diss > 0)
    c4 = float(np.max(l4[live] / (energy[live] * diss[live]))) if np.any(live) else 0.0
    C1 = YOUNG_C1_FACTOR * c4 if c4 > 0 else 1.0
    C2 = YOUNG_C2
    majorant = gronwall_majorant(times, z4, energy[0], C1, C2)
    inner = _cumtrapz(z4, times)
    with np.errstate(over="ignore"):
        terminal = C2 * float(np.trapezoid(np.exp(C1 * (inner[-1] - inner)) * z4, times))
    holds = bool(np.all(energy <= majorant * (1 + tol) + tol))
    nonincreasing = bool(np.all(np.diff(energy) <= tol * max(energy[0], 1e-300)))
    return EnergyDiagnostics(times, energy, diss, couplings, transfer, z4, rate, residual, c4, C1, C2, majorant, terminal, holds, nonincreasing)
