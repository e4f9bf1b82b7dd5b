"""Command-line front end: ``simulate``, ``verify`` and ``inspect``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .config import ConfigError, RunManifest, load_manifest
from .noise import JumpNoiseSpec, sample_path
from .norms import lp_norm, write_diagnostics_csv
from .snapshot import SnapshotError, read_snapshot, write_state
from .solver import (
    BlowUpError,
    LocalSolveError,
    convolution_record,
    integrate,
    measure_ball_constant,
    picard_solve,
    solve_global_2d,
    time_grid,
)
from .spectral import MhdState, divergence_residual, l2_norm_parseval
from .verification import LEVELS, MUTATIONS, run_suite

log = logging.getLogger("mhdjump")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def max_workers() -> int:
    try:
        return max(1, int(os.environ.get("MHDJUMP_THREADS", "1")))
    except ValueError:
        return 1


def _write_report(out: Path, payload: dict) -> None:
    (out / "report.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def run_simulation(manifest: RunManifest, seed: int, out: Path, stride: int) -> int:
    """One trajectory; ``seed`` drives the jump path, the manifest seed the fields."""
    out.mkdir(parents=True, exist_ok=True)
    grid, exps = manifest.grid, manifest.exps
    u0 = manifest.initial.build(grid, exps, manifest.seed)
    noise = manifest.noise or JumpNoiseSpec.zero(grid, seed)
    k1 = manifest.K1 if manifest.K1 is not None else measure_ball_constant(grid, exps, manifest.T, manifest.dt, seed=manifest.seed)[0]
    cfg = manifest.solver_config(k1)
    path = sample_path(noise, manifest.T, seed)
    payload = {"mode": manifest.mode, "seed": seed, "ball_constant_K1": k1, "jumps": len(path),
               "grid": {"dim": grid.dim, "n": grid.n, "box_length": grid.box_length},
               "exponents": {"r": exps.r, "p": exps.p, "q": exps.q}, "reports": []}
    try:
        if manifest.mode == "stepping":
            rec = integrate(u0, cfg, noise, path)
        elif manifest.mode == "local":
            z = convolution_record(noise, path, time_grid(cfg.T, cfg.dt, path.times))
            rec, rep = picard_solve(u0, z, cfg)
            payload["reports"].append(rep.to_dict())
        else:
            rec = solve_global_2d(u0, noise, cfg, path)
            payload["reports"] = [r.to_dict() for r in rec.metadata["reports"]]
    except (LocalSolveError, BlowUpError) as exc:
        payload["status"] = "failed"
        payload["error"] = str(exc)
        if isinstance(exc, LocalSolveError):
            payload["reports"].append(exc.report.to_dict())
        _write_report(out, payload)
        log.error("solve failed: %s", exc)
        return EXIT_FAIL
    write_diagnostics_csv(out / "diagnostics.csv", rec, exps.p)
    snaps = []
    if stride > 0:
        snap_dir = out / "snapshots"
        snap_dir.mkdir(exist_ok=True)
        last = len(rec) - 1
        for i, state in enumerate(rec.states):
            if i % stride == 0 or i == last:
                name = f"snap_{i:06d}.mhdf"
                write_state(snap_dir / name, state)
                snaps.append({"index": i, "time": float(rec.times[i]), "file": f"snapshots/{name}"})
    payload["status"] = "ok"
    payload["steps"] = len(rec) - 1
    payload["final_time"] = float(rec.times[-1])
    payload["snapshots"] = snaps
    _write_report(out, payload)
    return EXIT_OK


def _member(args):
    manifest_path, seed, out, stride = args
    return run_simulation(load_manifest(manifest_path), seed, Path(out), stride)


def cmd_simulate(args) -> int:
    try:
        manifest = load_manifest(args.config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    seed = manifest.seed if args.seed is None else args.seed
    out = Path(args.output_dir) if args.output_dir else manifest.output_dir
    stride = manifest.snapshot_stride if args.snapshot_stride is None else args.snapshot_stride
    if stride < 0:
        print("error: --snapshot-stride must be >= 0", file=sys.stderr)
        return EXIT_USAGE
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"error: output directory {out} is not writable: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.ensemble <= 1:
        status = run_simulation(manifest, seed, out, stride)
        print(f"simulate: {'ok' if status == EXIT_OK else 'failed'}; outputs in {out}")
        return status
    children = np.random.SeedSequence(seed).spawn(args.ensemble)
    jobs = [(args.config, int(c.generate_state(1)[0]), str(out / f"member_{i:03d}"), stride) for i, c in enumerate(children)]
    workers = min(max_workers(), args.ensemble)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            statuses = list(pool.map(_member, jobs))
    else:
        statuses = [_member(j) for j in jobs]
    failed = sum(s != EXIT_OK for s in statuses)
    print(f"simulate: {args.ensemble - failed}/{args.ensemble} ensemble members ok; outputs in {out}")
    return EXIT_OK if failed == 0 else EXIT_FAIL


def cmd_verify(args) -> int:
    report = run_suite(args.level, args.seed, workers=max_workers(), mutation=args.mutation)
    print(report.to_text())
    if args.output_dir:
        out = Path(args.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "verification.txt").write_text(report.to_text() + "\n")
        (out / "verification.csv").write_text(report.to_csv())
    return EXIT_OK if report.passed else EXIT_FAIL


def snapshot_summary(path) -> dict:
    snap = read_snapshot(path)
    grid = snap.grid
    info = {"dim": grid.dim, "n": grid.n, "box_length": grid.box_length, "components": int(snap.samples.shape[0])}
    if snap.samples.shape[0] == 2 * grid.dim:
        state: MhdState = snap.to_state()
        info.update(
            l2=l2_norm_parseval(state),
            l4=lp_norm(state, 4.0),
            l2_v=lp_norm(state.velocity, 2.0),
            l2_H=lp_norm(state.magnetic, 2.0),
            l4_v=lp_norm(state.velocity, 4.0),
            l4_H=lp_norm(state.magnetic, 4.0),
            max_divergence=max(divergence_residual(state.velocity), divergence_residual(state.magnetic)),
        )
    return info


def cmd_inspect(args) -> int:
    try:
        info = snapshot_summary(args.snapshot)
        if args.dump_slice:
            snap = read_snapshot(args.snapshot)
            field = snap.samples[args.component]
            if snap.grid.dim == 3:
                field = field[..., args.index]
            np.savetxt(args.dump_slice, field, fmt="%.17g")
    except (SnapshotError, FileNotFoundError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    if args.json:
        print(json.dumps(info, sort_keys=True))
    else:
        for key, value in info.items():
            print(f"{key:>15}: {value!r}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mhdjump", description="MHD with jump noise on the torus")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a manifest")
    sim.add_argument("--config", required=True, type=Path)
    sim.add_argument("--seed", type=int)
    sim.add_argument("--output-dir", type=Path)
    sim.add_argument("--snapshot-stride", type=int)
    sim.add_argument("--ensemble", type=int, default=1, help="independent jump paths with partitioned seeds")
    sim.set_defaults(func=cmd_simulate)

    ver = sub.add_parser("verify", help="run the acceptance suite")
    ver.add_argument("--level", choices=sorted(LEVELS), default="fast")
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--output-dir", type=Path)
    ver.add_argument("--mutation", choices=[m for m in MUTATIONS if m], help="deliberate fault injection")
    ver.set_defaults(func=cmd_verify)

    ins = sub.add_parser("inspect", help="summarize a field snapshot")
    ins.add_argument("snapshot", type=Path)
    ins.add_argument("--json", action="store_true")
    ins.add_argument("--dump-slice", type=Path, help="write one component as plain text")
    ins.add_argument("--component", type=int, default=0)
    ins.add_argument("--index", type=int, default=0, help="x3 index of the slice in 3D")
    ins.set_defaults(func=cmd_inspect)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
