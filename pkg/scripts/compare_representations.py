#!/usr/bin/env python3
"""Compare the eliminated (x-only) representation against the (x, w) one.

Solves seeded random convex-quadratic instances under both representations and
reports the optimal values, the relaxation sizes (number of moments), and the
solve times.  Full elimination drops the weight variables, so its moment
vector is strictly shorter at every order.
"""

from __future__ import annotations

import argparse
import time

from paretopt.benchmarks import random_convex_quadratic
from paretopt.extract import OwpOptions, run_owp
from paretopt.moment import assemble_sdp
from paretopt.reformulate import reformulate
from paretopt.representation import eliminate_all, lagrange_expr_xw


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=5)
    ap.add_argument("--m", type=int, default=2)
    ap.add_argument("--instances", type=int, default=20)
    ap.add_argument("--structure", default="free", choices=["free", "ball", "box", "orthant"])
    args = ap.parse_args()

    print(
        f"{'seed':>4} {'fmin(xonly)':>14} {'fmin(xw)':>14} {'diff':>10} "
        f"{'#mom xonly':>10} {'#mom xw':>8} {'secs':>6}"
    )
    worst = 0.0
    for seed in range(args.instances):
        prob = random_convex_quadratic(args.n, args.m, seed=seed, structure=args.structure)
        t0 = time.time()
        res_a = run_owp(prob, "xonly")
        res_b = run_owp(prob, "xw")
        dt = time.time() - t0
        pop_a = reformulate(prob, eliminate_all(prob))
        pop_b = reformulate(prob, lagrange_expr_xw(prob))
        k = res_a.order_used
        na = assemble_sdp(pop_a, max(k, pop_a.d0)).num_moments
        nb = assemble_sdp(pop_b, max(k, pop_b.d0)).num_moments
        diff = abs(res_a.fmin - res_b.fmin)
        worst = max(worst, diff)
        print(
            f"{seed:>4} {res_a.fmin:>14.8f} {res_b.fmin:>14.8f} {diff:>10.2e} "
            f"{na:>10} {nb:>8} {dt:>6.2f}"
        )
    print(f"\nlargest value discrepancy: {worst:.2e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
