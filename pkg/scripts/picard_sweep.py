"""Picard contraction ratios and iteration counts as the data approach the smallness gate."""

import argparse

import numpy as np

from mhdjump.norms import make_exponents
from mhdjump.solver import (
    LocalSolveError,
    SolverConfig,
    linear_part,
    measure_ball_constant,
    picard_solve,
    smallness_threshold,
    time_grid,
)
from mhdjump.norms import TrajectoryRecord, bochner_norm
from mhdjump.spectral import MhdState, make_grid, smooth_state


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dim", type=int, choices=[2, 3], default=2)
    ap.add_argument("--n", type=int, default=32)
    ap.add_argument("--T", type=float, default=0.5)
    ap.add_argument("--dt", type=float, default=0.025)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--fractions", type=float, nargs="+", default=[0.1, 0.3, 0.5, 0.7, 0.9, 0.99, 1.5, 3.0])
    args = ap.parse_args()
    grid = make_grid(args.dim, args.n)
    exps = make_exponents(args.dim, float(args.dim), 2.0 * args.dim)
    K1, ratios = measure_ball_constant(grid, exps, args.T, args.dt, seed=args.seed)
    print(f"K1 = {K1:.4g} (largest measured ratio {max(ratios):.4g}, x2 safety)")
    times = time_grid(args.T, args.dt)
    shape = smooth_state(grid, np.random.default_rng(args.seed), amplitude=1.0)
    unit = bochner_norm(TrajectoryRecord(times, linear_part(shape, times)), exps)
    thr = smallness_threshold(args.T, exps, K1)
    cfg = SolverConfig(exps, args.dt, args.T, ball_constant_K1=K1)
    zero = TrajectoryRecord(times, [MhdState.zeros(grid) for _ in times])
    print(f"{'fraction':>9} {'tau':>7} {'halvings':>8} {'iters':>6} {'max ratio':>10}")
    for f in args.fractions:
        try:
            _, rep = picard_solve(shape * (f * thr / unit), zero, cfg)
            worst = max(rep.contraction_ratios) if rep.contraction_ratios else 0.0
            print(f"{f:9.2f} {rep.tau:7.3f} {rep.halvings:8d} {rep.iterations:6d} {worst:10.4f}")
        except LocalSolveError as exc:
            print(f"{f:9.2f}  failed: {exc}")


if __name__ == "__main__":
    main()
