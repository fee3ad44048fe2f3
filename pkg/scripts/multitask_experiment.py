#!/usr/bin/env python3
"""Pick a shared nonnegative weight vector across random least-squares tasks.

Generates p tasks f_i(u) = ||X^(i) u - y||^2 over u >= 0 and minimizes the
preference ||u||^2 over the weakly Pareto set, i.e. finds the smallest weight
vector no task can improve without hurting another.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from paretopt.extract import OwpOptions, run_owp
from paretopt.io import gen_miso_random


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--tasks", type=int, default=5)
    ap.add_argument("--rows", type=int, default=10)
    ap.add_argument("--cols", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--kmax", type=int, default=2)
    args = ap.parse_args()

    prob = gen_miso_random(args.tasks, args.rows, args.cols, seed=args.seed)
    print(f"tasks={args.tasks} rows={args.rows} cols={args.cols} seed={args.seed}")
    t0 = time.time()
    res = run_owp(prob, "auto", OwpOptions(k_max=args.kmax))
    print(f"status {res.status.value} in {time.time() - t0:.1f}s, order {res.order_used}")
    if res.fmin is not None:
        print(f"preference value {res.fmin:.8f}")
    for mz in res.minimizers:
        print("u  =", np.round(mz.x, 5))
        print("w  =", np.round(mz.w, 5), " sum", float(np.sum(mz.w)))
        print("kkt =", f"{mz.kkt:.2e}")
    return 0 if res.solved else 1


if __name__ == "__main__":
    raise SystemExit(main())
