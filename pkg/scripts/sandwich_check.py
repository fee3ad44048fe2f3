#!/usr/bin/env python3
"""Bracket each solved value between its SDP bound and the oracle upper bound.

For every instance the first-order SDP relaxation is a lower bound on the
optimum over the weakly Pareto set, and the scalarization-grid oracle gives an
upper bound, so  sdp_bound <= fmin <= oracle_ub  must hold whenever the solve
certifies.  Violations indicate a soundness bug.
"""

from __future__ import annotations

import argparse
import time

from paretopt import benchmarks
from paretopt.extract import OwpOptions, run_owp
from paretopt.oracle import sample_wp

INSTANCES = {
    "ball_six_objectives": benchmarks.ball_six_objectives,
    "weighted_quadratic_four_objectives": benchmarks.weighted_quadratic_four_objectives,
    "shifted_norm_three_objectives": benchmarks.shifted_norm_three_objectives,
    "parabolic_region_two_objectives": benchmarks.parabolic_region_two_objectives,
}


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--grid", type=int, default=8, help="oracle simplex resolution")
    ap.add_argument("--random", type=int, default=0, help="extra seeded free instances")
    args = ap.parse_args()

    jobs = [(name, make()) for name, make in INSTANCES.items()]
    for seed in range(args.random):
        jobs.append(
            (f"random_free_{seed}", benchmarks.random_convex_quadratic(5, 2, seed, "free"))
        )

    print(f"{'instance':<36} {'sdp bound':>14} {'fmin':>14} {'oracle ub':>14} {'ok':>4}")
    all_ok = True
    for name, prob in jobs:
        t0 = time.time()
        res = run_owp(prob, "auto", OwpOptions(k_max=2))
        ub = sample_wp(prob, N=args.grid).upper_bound
        if not res.solved:
            print(f"{name:<36} {'(not solved)':<14}")
            continue
        lb = min(res.bounds.values())
        ok = lb <= res.fmin + 1e-8 and res.fmin <= ub + 1e-4
        all_ok &= ok
        print(
            f"{name:<36} {lb:>14.7f} {res.fmin:>14.7f} {ub:>14.7f} "
            f"{'yes' if ok else 'NO':>4}   ({time.time() - t0:.1f}s)"
        )
    return 0 if all_ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
