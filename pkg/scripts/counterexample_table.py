#!/usr/bin/env python3
"""Divergence table for the infinitesimal array 1/N + (-1)^i / N^alpha:
its linear sums converge (to 2t) while the quadratic sums grow like
2 t N^(1 - 2 alpha) once alpha < 1/2.

Usage: python scripts/counterexample_table.py [--alpha 0.25]
"""

import argparse
import sys

from freelevy.rmt import counterexample_rows


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--alpha", type=float, default=0.25)
    ap.add_argument("--t", type=float, default=1.0)
    ap.add_argument(
        "--ns", default="10,100,1000,10000",
        help="comma-separated grid resolutions",
    )
    args = ap.parse_args(argv)

    ns = [int(n) for n in args.ns.split(",")]
    rows = counterexample_rows(args.alpha, ns, args.t)
    print(f"alpha={args.alpha}  t={args.t}")
    print("N        sum(X_i^2)      2 t N^(1-2a)   ratio")
    for r in rows:
        print(
            f"{r['N']:<8d} {r['quadratic_sum']:<15.6f} "
            f"{r['reference']:<14.6f} {r['ratio']:.6f}"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
