#!/usr/bin/env python3
"""Solve the benchmark gallery and print a summary table.

Heavier instances (the hypercube at order 3, the polyhedral cone at order 3)
need several gigabytes of memory; pass --include-slow to attempt them anyway.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from paretopt import benchmarks
from paretopt.extract import OwpOptions, run_owp

FAST = {
    "ball_six_objectives": (benchmarks.ball_six_objectives, 2),
    "weighted_quadratic_four_objectives": (
        benchmarks.weighted_quadratic_four_objectives,
        2,
    ),
    "shifted_norm_three_objectives": (benchmarks.shifted_norm_three_objectives, 2),
    "parabolic_region_two_objectives": (benchmarks.parabolic_region_two_objectives, None),
}
SLOW = {
    "hypercube_two_objectives": (benchmarks.hypercube_two_objectives, 3),
    "polyhedron_two_objectives": (benchmarks.polyhedron_two_objectives, 3),
}


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--include-slow", action="store_true")
    ap.add_argument("--only", nargs="*", default=None, help="subset of instance names")
    args = ap.parse_args()

    table = dict(FAST)
    if args.include_slow:
        table.update(SLOW)
    if args.only:
        table = {k: v for k, v in table.items() if k in args.only}

    print(f"{'instance':<36} {'status':<18} {'fmin':>14} {'order':>5} {'secs':>8}")
    for name, (make, k_max) in table.items():
        prob = make()
        t0 = time.time()
        res = run_owp(prob, "auto", OwpOptions(k_max=k_max))
        dt = time.time() - t0
        fmin = "-" if res.fmin is None else f"{res.fmin:.7f}"
        print(
            f"{name:<36} {res.status.value:<18} {fmin:>14} "
            f"{res.order_used or '-':>5} {dt:>8.1f}"
        )
        for mz in res.minimizers:
            print(f"    x = {np.round(mz.x, 4)}")
            print(f"    w = {np.round(mz.w, 4)}   kkt = {mz.kkt:.2e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
