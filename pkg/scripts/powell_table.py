#!/usr/bin/env python3
"""Depth-3 test MSE on the Powell singular function, by training-set size.

Both split rules are evaluated on a shared draw of 10^4 test points per
dimension, so the (n, method) cells of powell.csv are directly comparable.
"""

import argparse

from minimaxsplit.experiments import PowellConfig, run_powell


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="runs/powell")
    ap.add_argument("--threads", type=int, default=4)
    args = ap.parse_args()

    cfg = PowellConfig(n_values=(1000, 10000), d_values=(4,), max_depth=3,
                       n_test=10000)
    res = run_powell(cfg, seed=args.seed, out=args.out, threads=args.threads)
    print(f"wrote {res.outdir}")
    for key, mse in sorted(res.summary.items()):
        print(f"{key}: {mse:.4f}")


if __name__ == "__main__":
    main()
