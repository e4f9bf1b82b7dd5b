"""Spatial L^p norms, Bochner trajectory norms, weak-L^q seminorms and exponents."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .spectral import MhdState, SpectralVectorField


@dataclass(frozen=True)
class ExponentTriple:
    """Exponents tied by ``1/q = (1/r - 1/p) d/2`` (zero scaling dimension)."""

    d: int
    r: float
    p: float
    q: float

    @property
    def marginal(self) -> bool:
        return bool(np.isclose(self.r, self.d))

    @property
    def wellposed_range(self) -> bool:
        """``r >= d``: the range where local well-posedness is proved."""
        return self.r >= self.d - 1e-12

    @property
    def time_weight_exponent(self) -> float:
        """Exponent of ``tau`` in the smallness gate, ``1/2 - d/(2r)``."""
        return 0.5 - self.d / (2.0 * self.r)


def make_exponents(d: int, r: float, p: float) -> ExponentTriple:
    if d not in (2, 3):
        raise ValueError(f"d must be 2 or 3, got {d}")
    if not 1 < r < p < np.inf:
        raise ValueError(f"need 1 < r < p < inf, got r={r}, p={p}")
    q = 1.0 / ((1.0 / r - 1.0 / p) * d / 2.0)
    return ExponentTriple(int(d), float(r), float(p), float(q))


def _pointwise_magnitude(samples: np.ndarray, dim: int) -> np.ndarray:
    return np.sqrt(np.sum(samples**2, axis=-dim - 1))


def lp_norm(f, p: float) -> float:
    """``(int |v|^p + |H|^p dx)^(1/p)`` for states, ``(int |f|^p)^(1/p)`` for fields."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    grid = f.grid
    mag = _pointwise_magnitude(f.to_physical(), grid.dim)
    total = np.sum(mag**p) * grid.cell_volume
    return float(total ** (1.0 / p))


def component_lp_norms(state: MhdState, p: float) -> tuple[float, float]:
    return lp_norm(state.velocity, p), lp_norm(state.magnetic, p)


def gradient_l2_squared(f) -> float:
    """``||grad f||_2^2`` summed over all components, via Parseval."""
    grid = f.grid
    kk = np.sum(grid.k**2, axis=0)
    return float(grid.volume * np.sum(kk * np.abs(f.coeffs) ** 2))


@dataclass
class TrajectoryRecord:
    """Time-stamped states and/or cached scalar norms.

    ``norms`` maps an exponent ``p`` to the array of ``||u(t_i)||_p``; when a
    Bochner norm is requested for a ``p`` not cached, it is computed from
    ``states``.
    """

    times: np.ndarray
    states: list[MhdState] | None = None
    norms: dict[float, np.ndarray] = field(default_factory=dict)
    jump_flags: np.ndarray | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if self.times.ndim != 1:
            raise ValueError("times must be one-dimensional")
        if np.any(np.diff(self.times) < 0):
            raise ValueError("times must be nondecreasing")
        if self.states is not None and len(self.states) != len(self.times):
            raise ValueError("states and times have different lengths")
        for p, vals in self.norms.items():
            if len(vals) != len(self.times):
                raise ValueError(f"norm array for p={p} has wrong length")
        if self.jump_flags is None:
            self.jump_flags = np.zeros(len(self.times), dtype=bool)

    def __len__(self):
        return len(self.times)

    def norm_series(self, p: float) -> np.ndarray:
        if p not in self.norms:
            if self.states is None:
                raise ValueError(f"no states and no cached norms for p={p}")
            self.norms[p] = np.array([lp_norm(s, p) for s in self.states])
        return self.norms[p]

    def window(self, t_end: float) -> "TrajectoryRecord":
        """Sub-record on ``[t0, t_end]`` (grid points only)."""
        keep = self.times <= t_end + 1e-12
        states = None if self.states is None else [s for s, k in zip(self.states, keep) if k]
        norms = {p: v[keep] for p, v in self.norms.items()}
        return TrajectoryRecord(self.times[keep], states, norms, self.jump_flags[keep], dict(self.metadata))


def bochner_norm(rec: TrajectoryRecord, exps: ExponentTriple) -> float:
    """``(int_0^T ||u(t)||_p^q dt)^(1/q)`` by the trapezoidal rule on ``rec.times``."""
    if len(rec) == 0:
        raise ValueError("empty trajectory record")
    vals = rec.norm_series(exps.p)
    if len(rec) == 1:
        return 0.0
    return float(np.trapezoid(vals**exps.q, rec.times) ** (1.0 / exps.q))


def bochner_norm_of_series(times: Sequence[float], values: Sequence[float], q: float) -> float:
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(times) == 0:
        raise ValueError("empty series")
    if len(times) == 1:
        return 0.0
    return float(np.trapezoid(np.abs(values) ** q, times) ** (1.0 / q))


def weak_lq_seminorm(samples: Sequence[float], q: float, step: float, levels: int = 200) -> float:
    """``sup_lambda lambda * |{|f| >= lambda}|^(1/q)`` on a uniform cell grid.

    Each sample represents one cell of width ``step``; the distribution
    function is a cell count times ``step``.  The level sweep is ``levels``
    log-spaced values between the smallest and largest nonzero ``|f|``.
    Counting ``|f| >= lambda`` rather than ``>`` does not change the supremum
    of the continuous seminorm and makes a constant function exact.
    """
    if not 1 <= q < np.inf:
        raise ValueError(f"q must lie in [1, inf), got {q}")
    f = np.abs(np.asarray(samples, dtype=float))
    if not np.all(np.isfinite(f)):
        raise ValueError("samples must be finite")
    nz = f[f > 0]
    if nz.size == 0:
        return 0.0
    lam = np.geomspace(nz.min(), nz.max(), levels) if nz.min() < nz.max() else np.array([nz.max()])
    ordered = np.sort(f)
    counts = f.size - np.searchsorted(ordered, lam, side="left")
    return float(np.max(lam * (counts * step) ** (1.0 / q)))


def strong_lq_norm(samples: Sequence[float], q: float, step: float) -> float:
    f = np.abs(np.asarray(samples, dtype=float))
    return float((np.sum(f**q) * step) ** (1.0 / q))


DIAGNOSTIC_COLUMNS = ("time", "lp_norm_v", "lp_norm_H", "energy", "jump_flag")


def diagnostics_rows(rec: TrajectoryRecord, p: float):
    if rec.states is None:
        raise ValueError("diagnostics need states")
    for t, s, jf in zip(rec.times, rec.states, rec.jump_flags):
        nv, nh = component_lp_norms(s, p)
        energy = 0.5 * s.grid.volume * float(np.sum(np.abs(s.coeffs) ** 2))
        yield t, nv, nh, energy, int(bool(jf))


def write_diagnostics_csv(path, rec: TrajectoryRecord, p: float):
    """Write the five-column diagnostics table; floats use round-trip repr."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(DIAGNOSTIC_COLUMNS)
        for t, nv, nh, e, jf in diagnostics_rows(rec, p):
            w.writerow([repr(float(t)), repr(nv), repr(nh), repr(e), jf])


def read_diagnostics_csv(path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return {c: np.array([float(r[c]) for r in rows]) for c in DIAGNOSTIC_COLUMNS}
