"""Command-line interface.

Exit codes for `solve`: 0 Solved, 2 InfeasibleNoWPP, 3 OrderLimitReached,
1 usage / parse / internal errors.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .extract import (
    OwpOptions,
    OwpStatus,
    choose_representation,
    run_owp,
)
from .io import (
    ProblemFormatError,
    gen_miso,
    gen_miso_random,
    gen_mimo_autoencoder,
    gen_mimo_random,
    load_csv_matrix,
    parse_problem,
    result_to_json,
    serialize_problem,
)
from .moment import assemble_sdp, export_text
from .oracle import sample_wp
from .poly import Poly
from .reformulate import reformulate
from .representation import (
    LeftInverseNotFound,
    StructureError,
    XLambda,
    XOnly,
    XW,
    check_convexity,
)
from .sdp import SdpOptions


def _load_problem(path: str):
    with open(path) as fh:
        text = fh.read()
    prob = parse_problem(text)
    for warning in check_convexity(prob):
        print(f"warning: {warning}", file=sys.stderr)
    return prob


def _add_rep_flags(p: argparse.ArgumentParser):
    p.add_argument(
        "--rep",
        choices=["auto", "xw", "xlambda", "xonly"],
        default="auto",
        help="weakly-Pareto representation to use",
    )
    p.add_argument(
        "--inverse-degree",
        type=int,
        default=2,
        help="degree budget for polynomial one-sided inverses",
    )


def _cmd_solve(args) -> int:
    prob = _load_problem(args.problem)
    opts = OwpOptions(
        k_max=args.kmax,
        rank_tol=args.rank_tol,
        sdp=SdpOptions(feas_tol=args.sdp_tol, gap_tol=args.sdp_tol, verbose=args.verbose),
        inverse_degree=args.inverse_degree,
    )
    res = run_owp(prob, args.rep, opts)
    print(result_to_json(res))
    return {
        OwpStatus.SOLVED: 0,
        OwpStatus.INFEASIBLE_NO_WPP: 2,
        OwpStatus.ORDER_LIMIT_REACHED: 3,
    }[res.status]


def _cmd_represent(args) -> int:
    prob = _load_problem(args.problem)
    rep = choose_representation(prob, args.rep, args.inverse_degree)
    doc = {"representation": type(rep).__name__, "n": rep.n, "m": rep.m, "l": rep.l}
    if isinstance(rep, (XW, XOnly)):
        doc["lambda"] = [repr(p) for p in rep.lambda_exprs]
    if isinstance(rep, (XLambda, XOnly)):
        doc["w"] = [repr(p) for p in rep.weight_exprs]
    for key in ("lambda", "w"):
        for i, expr in enumerate(doc.get(key, [])):
            print(f"{key}[{i + 1}] = {expr}")
    print(json.dumps(doc, indent=2))
    return 0


def _cmd_oracle(args) -> int:
    prob = _load_problem(args.problem)
    report = sample_wp(prob, args.grid)
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(report.to_csv())
    best = report.best
    print(
        json.dumps(
            {
                "samples": len(report.samples),
                "skipped": report.skipped,
                "upper_bound": report.upper_bound if report.samples else None,
                "best": None
                if best is None
                else {
                    "w": list(map(float, best.w)),
                    "x": list(map(float, best.x)),
                    "f0": best.f0,
                    "kkt_residual": best.kkt,
                },
            },
            indent=2,
        )
    )
    return 0


def _cmd_gen_miso(args) -> int:
    if args.random:
        p, n1, n2 = args.random
        prob = gen_miso_random(p, n1, n2, seed=args.seed)
    else:
        if not args.x or not args.y:
            raise ProblemFormatError("gen-miso needs --x/--y CSVs or --random p n1 n2")
        mats = [load_csv_matrix(path) for path in args.x]
        y = load_csv_matrix(args.y).ravel()
        prob = gen_miso(mats, y)
    text = serialize_problem(prob)
    _write_out(args.output, text)
    return 0


def _cmd_gen_mimo(args) -> int:
    if args.random:
        p, n = args.random
        prob = gen_mimo_random(p, n, tanh_degree=args.degree, seed=args.seed)
    else:
        if not args.x:
            raise ProblemFormatError("gen-mimo needs --x CSV (one task vector per row) or --random p n")
        rows = load_csv_matrix(args.x)
        prob = gen_mimo_autoencoder([rows[i] for i in range(rows.shape[0])], args.degree)
    _write_out(args.output, serialize_problem(prob))
    return 0


def _cmd_export_sdp(args) -> int:
    prob = _load_problem(args.problem)
    rep = choose_representation(prob, args.rep, args.inverse_degree)
    pop = reformulate(prob, rep)
    k = args.order if args.order is not None else max(
        pop.d0, -(-pop.objective.degree() // 2)
    )
    sdp = assemble_sdp(pop, k)
    _write_out(args.output, export_text(sdp))
    return 0


def _write_out(path, text: str):
    if path in (None, "-"):
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(path, "w") as fh:
            fh.write(text)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="paretopt",
        description="Optimize a preference function over the weakly Pareto set "
        "of a convex multiobjective polynomial program.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("solve", help="run the moment relaxation hierarchy")
    ps.add_argument("problem")
    _add_rep_flags(ps)
    ps.add_argument("--kmax", type=int, default=None, help="largest relaxation order")
    ps.add_argument("--rank-tol", type=float, default=1e-4, help="numeric rank tolerance")
    ps.add_argument("--sdp-tol", type=float, default=1e-8, help="SDP solver tolerance")
    ps.add_argument("--verbose", action="store_true", help="SDP iteration log to stderr")
    ps.set_defaults(func=_cmd_solve)

    pr = sub.add_parser("represent", help="print the eliminated expressions")
    pr.add_argument("problem")
    _add_rep_flags(pr)
    pr.set_defaults(func=_cmd_represent)

    po = sub.add_parser("oracle", help="sample the weakly Pareto set via scalarizations")
    po.add_argument("problem")
    po.add_argument("--grid", type=int, default=20, help="simplex grid resolution")
    po.add_argument("--csv", default=None, help="write samples to a CSV file")
    po.set_defaults(func=_cmd_oracle)

    pm = sub.add_parser("gen-miso", help="generate a least-squares multi-task problem")
    pm.add_argument("--x", nargs="*", default=None, help="one CSV matrix per task")
    pm.add_argument("--y", default=None, help="target vector CSV")
    pm.add_argument("--random", nargs=3, type=int, metavar=("P", "N1", "N2"), default=None)
    pm.add_argument("--seed", type=int, default=0)
    pm.add_argument("-o", "--output", default=None)
    pm.set_defaults(func=_cmd_gen_miso)

    pa = sub.add_parser("gen-mimo", help="generate an autoencoder multi-task problem")
    pa.add_argument("--x", default=None, help="CSV with one task vector per row")
    pa.add_argument("--random", nargs=2, type=int, metavar=("P", "N"), default=None)
    pa.add_argument("--degree", type=int, choices=[3, 5], default=3)
    pa.add_argument("--seed", type=int, default=0)
    pa.add_argument("-o", "--output", default=None)
    pa.set_defaults(func=_cmd_gen_mimo)

    pe = sub.add_parser("export-sdp", help="dump the assembled SDP as sparse text")
    pe.add_argument("problem")
    _add_rep_flags(pe)
    pe.add_argument("--order", type=int, default=None)
    pe.add_argument("-o", "--output", default=None)
    pe.set_defaults(func=_cmd_export_sdp)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (ProblemFormatError, StructureError, LeftInverseNotFound, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
