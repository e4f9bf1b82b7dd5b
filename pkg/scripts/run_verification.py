"""Run the acceptance suite and write text and CSV reports."""

import argparse
from pathlib import Path

from mhdjump.verification import run_suite


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--level", choices=["fast", "full"], default="fast")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", type=Path, default=Path("verification"))
    args = ap.parse_args()
    rep = run_suite(args.level, args.seed, workers=args.workers)
    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / f"report_{args.level}.txt").write_text(rep.to_text() + "\n")
    (args.out / f"report_{args.level}.csv").write_text(rep.to_csv())
    print(rep.to_text())
    raise SystemExit(0 if rep.passed else 1)


if __name__ == "__main__":
    main()
