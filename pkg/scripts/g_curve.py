"""Tabulate g(N), the largest epsilon for which level-m entries of L underflow.

    python scripts/g_curve.py --n-range 1:5000 --out results/g_curve.csv
"""

import argparse
from pathlib import Path

from cholfill.cli import parse_range, run_gcurve
from cholfill.fill_model import g_of_N


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n-range", default="1:5000")
    ap.add_argument("--out", type=Path, default=Path("results/g_curve.csv"))
    args = ap.parse_args()

    lo, hi = parse_range(args.n_range)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(run_gcurve(lo, hi))
    best = max(range(lo, hi + 1), key=g_of_N)
    above = [N for N in range(lo, hi + 1) if g_of_N(N) > 1e-3]
    print(f"max g = {g_of_N(best):.4e} at N={best}")
    if above:
        print(f"g > 1e-3 for N in [{above[0]}, {above[-1]}]")
    print(f"{hi} * g({hi}) = {hi * g_of_N(hi):.4f} -> {args.out}")


if __name__ == "__main__":
    main()
