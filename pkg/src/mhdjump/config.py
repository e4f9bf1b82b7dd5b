"""Run manifests and noise definitions in TOML.

Both files carry ``schema_version = 1``.  Unknown keys and tables are errors;
messages name the file and, where possible, the line.

Manifest::

    schema_version = 1
    seed = 7
    output_dir = "out"          # relative to the manifest
    snapshot_stride = 10
    noise = "noise.toml"        # optional, relative to the manifest

    [grid]
    dim = 2
    n = 32
    box_length = 6.283185307179586

    [exponents]
    r = 2.0
    p = 4.0

    [solver]
    dt = 0.01
    T = 1.0
    mode = "global"             # "global", "local" or "stepping"
    ball_constant_K1 = "auto"   # or a positive number

    [initial]
    kind = "smooth"             # "smooth", "rough", "taylor_green", "zero"
    amplitude = 0.5

Noise file::

    schema_version = 1

    [modulation]
    kind = "cosine"
    amplitude = 1.0
    omega = 6.283185307179586

    [[marks]]
    name = "v1"
    intensity = 2.0
    component = "velocity"      # "velocity", "magnetic" or "both"
    amplitude = 0.1             # L^2 norm of the amplitude field
    k0 = 2.0
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import tomli

from .noise import JumpNoiseSpec, Modulation
from .norms import ExponentTriple, make_exponents
from .solver import SolverConfig
from .spectral import TWO_PI, Grid, MhdState, rough_state, smooth_state, taylor_green_mhd

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    pass


def _line_of(text: str, key: str, table: str | None = None) -> int | None:
    """First line assigning ``key`` (inside ``[table]`` when given), 1-based."""
    current = None
    pat = re.compile(rf"^\s*{re.escape(key)}\s*=")
    for i, line in enumerate(text.splitlines(), 1):
        head = re.match(r"^\s*\[\[?\s*([^\]]+?)\s*\]\]?", line)
        if head:
            current = head.group(1)
            if table is None and current == key:
                return i
            continue
        if pat.match(line) and (table is None and current is None or current == table):
            return i
    return None


def _where(path, text, key, table=None) -> str:
    line = _line_of(text, key, table)
    return f"{path}:{line}" if line else str(path)


def _load(path: Path) -> tuple[dict, str]:
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    text = path.read_text()
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"{_where(path, text, 'schema_version')}: schema_version must be {SCHEMA_VERSION}, got {version!r}")
    return data, text


def _check_keys(table: dict, allowed: dict, path, text, name=None):
    for key in table:
        if key not in allowed:
            raise ConfigError(f"{_where(path, text, key, name)}: unknown key {key!r}" + (f" in [{name}]" if name else ""))
    for key, default in allowed.items():
        if default is _REQUIRED and key not in table:
            raise ConfigError(f"{path}: missing key {key!r}" + (f" in [{name}]" if name else ""))


_REQUIRED = object()


def _typed(value, kind, path, text, key, table):
    ok = isinstance(value, kind) and not (kind in (int, (int, float)) and isinstance(value, bool))
    if not ok:
        raise ConfigError(f"{_where(path, text, key, table)}: {key!r} has the wrong type ({type(value).__name__})")
    return value


@dataclass
class InitialCondition:
    kind: str = "smooth"
    amplitude: float = 0.1
    k0: float = 2.0
    r: float | None = None
    seed: int | None = None

    def build(self, grid: Grid, exps: ExponentTriple, seed: int) -> MhdState:
        rng = np.random.default_rng(self.seed if self.seed is not None else seed)
        if self.kind == "zero":
            return MhdState.zeros(grid)
        if self.kind == "smooth":
            return smooth_state(grid, rng, k0=self.k0, amplitude=self.amplitude)
        if self.kind == "rough":
            u = rough_state(grid, rng, self.r if self.r is not None else exps.r)
            return u * (self.amplitude / max(u.coeff_norm() * np.sqrt(grid.volume), 1e-300))
        if self.kind == "taylor_green":
            if grid.dim != 2:
                raise ConfigError("taylor_green initial data is two-dimensional")
            return taylor_green_mhd(grid, self.amplitude)
        raise ConfigError(f"unknown initial kind {self.kind!r}")


@dataclass
class RunManifest:
    path: Path
    grid: Grid
    exps: ExponentTriple
    dt: float
    T: float
    mode: str
    K1: float | None
    solver_options: dict
    initial: InitialCondition
    seed: int
    output_dir: Path
    snapshot_stride: int
    noise_path: Path | None = None
    noise: JumpNoiseSpec | None = None

    def solver_config(self, K1: float) -> SolverConfig:
        return SolverConfig(self.exps, self.dt, self.T, ball_constant_K1=K1, **self.solver_options)


_TOP = {
    "schema_version": _REQUIRED,
    "seed": 0,
    "output_dir": "out",
    "snapshot_stride": 0,
    "noise": None,
    "grid": _REQUIRED,
    "exponents": _REQUIRED,
    "solver": _REQUIRED,
    "initial": None,
}
_GRID = {"dim": _REQUIRED, "n": _REQUIRED, "box_length": TWO_PI}
_EXPS = {"r": _REQUIRED, "p": _REQUIRED}
_SOLVER = {
    "dt": _REQUIRED,
    "T": _REQUIRED,
    "mode": "global",
    "ball_constant_K1": "auto",
    "picard_tol": 1e-10,
    "picard_max_iter": 50,
    "defensive_projection": True,
    "blowup_threshold": 1e12,
}
_INITIAL = {"kind": "smooth", "amplitude": 0.1, "k0": 2.0, "r": None, "seed": None}
_MODES = ("global", "local", "stepping")


def load_manifest(path) -> RunManifest:
    path = Path(path)
    data, text = _load(path)
    _check_keys(data, _TOP, path, text)
    for name in ("grid", "exponents", "solver", "initial"):
        if name in data and not isinstance(data[name], dict):
            raise ConfigError(f"{_where(path, text, name)}: {name!r} must be a table")
    g, e, s = data["grid"], data["exponents"], data["solver"]
    ini = data.get("initial", {})
    _check_keys(g, _GRID, path, text, "grid")
    _check_keys(e, _EXPS, path, text, "exponents")
    _check_keys(s, _SOLVER, path, text, "solver")
    _check_keys(ini, _INITIAL, path, text, "initial")
    num = (int, float)
    try:
        grid = Grid(_typed(g["dim"], int, path, text, "dim", "grid"), _typed(g["n"], int, path, text, "n", "grid"),
                    float(_typed(g.get("box_length", TWO_PI), num, path, text, "box_length", "grid")))
        exps = make_exponents(grid.dim, float(_typed(e["r"], num, path, text, "r", "exponents")),
                              float(_typed(e["p"], num, path, text, "p", "exponents")))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{path}: {exc}") from None
    mode = s.get("mode", "global")
    if mode not in _MODES:
        raise ConfigError(f"{_where(path, text, 'mode', 'solver')}: mode must be one of {_MODES}, got {mode!r}")
    if mode == "global" and (grid.dim != 2 or not exps.marginal):
        raise ConfigError(f"{_where(path, text, 'mode', 'solver')}: global mode needs dim = 2 and r = 2")
    k1 = s.get("ball_constant_K1", "auto")
    if k1 == "auto":
        k1 = None
    elif not isinstance(k1, (int, float)) or isinstance(k1, bool) or k1 <= 0:
        raise ConfigError(f"{_where(path, text, 'ball_constant_K1', 'solver')}: ball_constant_K1 must be 'auto' or positive")
    options = {k: s[k] for k in ("picard_tol", "picard_max_iter", "defensive_projection", "blowup_threshold") if k in s}
    dt = float(_typed(s["dt"], num, path, text, "dt", "solver"))
    T = float(_typed(s["T"], num, path, text, "T", "solver"))
    if dt <= 0 or T <= 0:
        raise ConfigError(f"{_where(path, text, 'dt', 'solver')}: dt and T must be positive")
    initial = InitialCondition(**{k: ini[k] for k in ini})
    if initial.kind not in ("smooth", "rough", "taylor_green", "zero"):
        raise ConfigError(f"{_where(path, text, 'kind', 'initial')}: unknown initial kind {initial.kind!r}")
    stride = _typed(data.get("snapshot_stride", 0), int, path, text, "snapshot_stride", None)
    if stride < 0:
        raise ConfigError(f"{_where(path, text, 'snapshot_stride')}: snapshot_stride must be >= 0")
    seed = _typed(data.get("seed", 0), int, path, text, "seed", None)
    base = path.parent
    noise_path = None
    noise = None
    if data.get("noise") is not None:
        noise_path = base / data["noise"]
        if not noise_path.is_file():
            raise ConfigError(f"{_where(path, text, 'noise')}: noise file not found: {noise_path}")
        noise = load_noise(noise_path, grid, seed)
    return RunManifest(path, grid, exps, dt, T, mode, None if k1 is None else float(k1), options, initial, seed,
                       base / data.get("output_dir", "out"), stride, noise_path, noise)


_NOISE = {"schema_version": _REQUIRED, "modulation": None, "marks": None}
_MOD = {"kind": "constant", "amplitude": 1.0, "omega": 0.0, "rate": 0.0}
_MARK = {"name": _REQUIRED, "intensity": _REQUIRED, "component": "both", "amplitude": _REQUIRED, "k0": 2.0, "seed": None}


def load_noise(path, grid: Grid, seed: int = 0) -> JumpNoiseSpec:
    """Build the noise; each mark's amplitude field is a smooth random state of the given ``L^2`` norm."""
    path = Path(path)
    data, text = _load(path)
    _check_keys(data, _NOISE, path, text)
    mod = data.get("modulation", {})
    _check_keys(mod, _MOD, path, text, "modulation")
    try:
        modulation = Modulation(**mod)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{_where(path, text, 'kind', 'modulation')}: {exc}") from None
    marks = data.get("marks", [])
    names, rates, amps = [], [], []
    for i, m in enumerate(marks):
        _check_keys(m, _MARK, path, text, "marks")
        comp = m.get("component", "both")
        if comp not in ("velocity", "magnetic", "both"):
            raise ConfigError(f"{_where(path, text, 'component', 'marks')}: unknown component {comp!r}")
        rate = m["intensity"]
        if not isinstance(rate, (int, float)) or rate < 0:
            raise ConfigError(f"{_where(path, text, 'intensity', 'marks')}: intensity must be a nonnegative number")
        rng = np.random.default_rng([seed, i] if m.get("seed") is None else m["seed"])
        state = smooth_state(grid, rng, k0=float(m.get("k0", 2.0)))
        c = state.coeffs.copy()
        if comp == "velocity":
            c[1] = 0
        elif comp == "magnetic":
            c[0] = 0
        state = MhdState(grid, c)
        norm = state.coeff_norm() * np.sqrt(grid.volume)
        state = state * (float(m["amplitude"]) / norm if norm > 0 else 0.0)
        names.append(str(m["name"]))
        rates.append(float(rate))
        amps.append(state)
    if len(set(names)) != len(names):
        raise ConfigError(f"{path}: duplicate mark names")
    return JumpNoiseSpec(grid, tuple(names), np.array(rates), tuple(amps), modulation, seed)
