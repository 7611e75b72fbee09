"""Tabulate the required signal delta(q) and the optimal q across signal shapes.

    python3 scripts/optimal_q_sweep.py --n 100 --R 1

D = sqrt(N) R / d grows as the signal gets sparser relative to its spread.
"""
import argparse

import numpy as np

from adaptlq.power import PowerPlanInput, delta_required, optimal_q, threshold_q


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=100)
    ap.add_argument("--R", type=float, default=1.0)
    ap.add_argument("--s", type=int, default=1)
    ap.add_argument("--r", type=int, default=1)
    ap.add_argument("--qmax", type=int, default=20)
    args = ap.parse_args(argv)
    print(f"{'D':>10} {'opt q':>6} {'thr q':>6}   delta(2)  delta(4)  delta(6)")
    for D in np.logspace(-1, 6, 15):
        plan = PowerPlanInput(d=1, N=(D / args.R) ** 2, R=args.R, s=args.s, r=args.r,
                              n=args.n, q_max=args.qmax)
        vals = [delta_required(plan, q) for q in (2, 4, 6)]
        print(f"{D:>10.3g} {optimal_q(plan):>6} {threshold_q(D, args.s):>6}   "
              + "  ".join(f"{v:8.3g}" for v in vals))


if __name__ == "__main__":
    main()
