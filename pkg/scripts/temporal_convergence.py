"""Self-convergence of exponential Euler on the 2D Taylor-Green MHD pair."""

import argparse

import numpy as np

from mhdjump.norms import make_exponents
from mhdjump.solver import SolverConfig, integrate
from mhdjump.spectral import l2_norm_parseval, make_grid, taylor_green_mhd


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=64)
    ap.add_argument("--T", type=float, default=1.0)
    ap.add_argument("--amplitude", type=float, default=1.0)
    ap.add_argument("--dts", type=float, nargs="+", default=[2e-2, 1e-2, 5e-3, 2.5e-3, 1.25e-3])
    args = ap.parse_args()
    grid = make_grid(2, args.n)
    exps = make_exponents(2, 2.0, 4.0)
    u0 = taylor_green_mhd(grid, args.amplitude)
    ends = [integrate(u0, SolverConfig(exps, dt, args.T)).states[-1] for dt in args.dts]
    print(f"{'dt':>10} {'|u_dt - u_dt/2|':>18} {'order':>8}")
    prev = None
    for dt, a, b in zip(args.dts, ends[:-1], ends[1:]):
        err = l2_norm_parseval(a - b)
        order = "" if prev is None else f"{np.log2(prev / err):8.3f}"
        print(f"{dt:10.3e} {err:18.6e} {order}")
        prev = err


if __name__ == "__main__":
    main()
