"""Decay of ||S(t) u0||_p for rough data against the L^r -> L^p smoothing exponent."""

import argparse

import numpy as np

from mhdjump.semigroup import loglog_slope, smoothing_bound_exponent, smoothing_probe
from mhdjump.spectral import make_grid, rough_state

TRIPLES = [(2, 2.0, 4.0), (2, 2.0, 8.0), (3, 3.0, 6.0), (3, 3.0, 9.0)]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n2", type=int, default=128)
    ap.add_argument("--n3", type=int, default=32)
    ap.add_argument("--samples", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    ts = np.geomspace(1e-3, 1e-1, 11)
    print(f"{'d':>2} {'r':>4} {'p':>4} {'bound':>8} {'min slope':>10} {'max slope':>10}")
    for d, r, p in TRIPLES:
        grid = make_grid(d, args.n2 if d == 2 else args.n3)
        slopes = [loglog_slope(*zip(*smoothing_probe(r, p, rough_state(grid, rng, r), ts))) for _ in range(args.samples)]
        print(f"{d:2d} {r:4.1f} {p:4.1f} {smoothing_bound_exponent(d, r, p):8.4f} {min(slopes):10.4f} {max(slopes):10.4f}")


if __name__ == "__main__":
    main()
