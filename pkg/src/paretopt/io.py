"""Problem-file serialization, multi-task-learning generators, result reports.

Problem files are single JSON documents; polynomials are exponent/coefficient
term lists so parsing is exact (bit-level round trips).
"""

from __future__ import annotations

import json
from dataclasses import asdict
from typing import Optional, Sequence

import numpy as np

from .extract import OwpResult
from .poly import Poly
from .representation import (
    Ball,
    Box,
    ConstraintStructure,
    Custom,
    Free,
    MopProblem,
    NonnegOrthant,
    Polyhedral,
    Triangular,
)

FORMAT_VERSION = "1"


class ProblemFormatError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Polynomial terms


def poly_to_terms(p: Poly) -> list[dict]:
    return [{"exp": list(a), "coef": c} for a, c in p.items_grlex()]


def poly_from_terms(terms, nvars: int, where: str) -> Poly:
    if not isinstance(terms, list):
        raise ProblemFormatError(f"{where}: expected a list of terms")
    pairs = []
    for t in terms:
        try:
            exp, coef = t["exp"], t["coef"]
        except (TypeError, KeyError):
            raise ProblemFormatError(f"{where}: each term needs 'exp' and 'coef'")
        if len(exp) != nvars:
            raise ProblemFormatError(
                f"{where}: exponent length {len(exp)} != nvars {nvars}"
            )
        pairs.append((tuple(exp), float(coef)))
    return Poly(nvars, pairs)


# ---------------------------------------------------------------------------
# Structures


def _structure_to_json(st: ConstraintStructure) -> dict:
    if isinstance(st, Box):
        return {"type": "box", "a": list(st.a)}
    if isinstance(st, Polyhedral):
        return {"type": "polyhedral", "A": [list(r) for r in st.A], "b": list(st.b)}
    if isinstance(st, Triangular):
        return {"type": "triangular"}
    if isinstance(st, Ball):
        return {"type": "ball"}
    if isinstance(st, NonnegOrthant):
        return {"type": "nonneg_orthant"}
    if isinstance(st, Free):
        return {"type": "free"}
    if isinstance(st, Custom):
        out = {
            "type": "custom",
            "cprime1": [[poly_to_terms(p) for p in row] for row in st.cprime1],
        }
        if st.cprime2 is not None:
            out["cprime2"] = [[poly_to_terms(p) for p in row] for row in st.cprime2]
        return out
    raise ProblemFormatError(f"unknown structure {type(st).__name__}")


def _structure_from_json(doc: dict, nvars: int) -> ConstraintStructure:
    kind = doc.get("type")
    if kind == "box":
        return Box(a=tuple(float(v) for v in doc["a"]))
    if kind == "polyhedral":
        return Polyhedral(
            A=tuple(tuple(float(v) for v in row) for row in doc["A"]),
            b=tuple(float(v) for v in doc["b"]),
        )
    if kind == "triangular":
        return Triangular()
    if kind == "ball":
        return Ball()
    if kind == "nonneg_orthant":
        return NonnegOrthant()
    if kind == "free":
        return Free()
    if kind == "custom":
        c1 = tuple(
            tuple(poly_from_terms(p, nvars, "structure.cprime1") for p in row)
            for row in doc["cprime1"]
        )
        c2 = None
        if "cprime2" in doc:
            c2 = tuple(
                tuple(poly_from_terms(p, nvars, "structure.cprime2") for p in row)
                for row in doc["cprime2"]
            )
        return Custom(cprime1=c1, cprime2=c2)
    raise ProblemFormatError(f"unknown structure type {kind!r}")


# ---------------------------------------------------------------------------
# Problem documents


def serialize_problem(prob: MopProblem) -> str:
    doc = {
        "version": FORMAT_VERSION,
        "nvars": prob.n,
        "preference": poly_to_terms(prob.preference),
        "objectives": [poly_to_terms(f) for f in prob.objectives],
        "constraints": [poly_to_terms(c) for c in prob.constraints],
        "structure": _structure_to_json(prob.structure),
        "convex": prob.convex_asserted,
    }
    return json.dumps(doc, indent=2)


def parse_problem(text: str) -> MopProblem:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFormatError(f"invalid JSON: {exc}")
    for key in ("nvars", "preference", "objectives", "structure"):
        if key not in doc:
            raise ProblemFormatError(f"missing field {key!r}")
    n = int(doc["nvars"])
    if n < 1:
        raise ProblemFormatError("nvars must be positive")
    objectives = [
        poly_from_terms(t, n, f"objectives[{j}]") for j, t in enumerate(doc["objectives"])
    ]
    if not objectives:
        raise ProblemFormatError("objectives must be nonempty")
    constraints = [
        poly_from_terms(t, n, f"constraints[{i}]")
        for i, t in enumerate(doc.get("constraints", []))
    ]
    return MopProblem(
        n=n,
        preference=poly_from_terms(doc["preference"], n, "preference"),
        objectives=objectives,
        constraints=constraints,
        structure=_structure_from_json(doc["structure"], n),
        convex_asserted=bool(doc.get("convex", True)),
    )


# ---------------------------------------------------------------------------
# Multi-task learning generators


def gen_miso(
    X_list: Sequence[np.ndarray], y: np.ndarray, preference: Optional[Poly] = None
) -> MopProblem:
    """Single-output multi-task least squares: f_i(u) = ||X^(i) u - y||^2 over u >= 0."""
    y = np.asarray(y, dtype=float)
    mats = [np.atleast_2d(np.asarray(X, dtype=float)) for X in X_list]
    if not mats:
        raise ProblemFormatError("need at least one task matrix")
    n = mats[0].shape[1]
    for X in mats:
        if X.shape[1] != n:
            raise ProblemFormatError("task matrices must share the column count")
        if X.shape[0] != y.shape[0]:
            raise ProblemFormatError("task matrix rows must match the target length")

    objectives = []
    for X in mats:
        Q = X.T @ X
        lin = -2.0 * (y @ X)
        terms = [((0,) * n, float(y @ y))]
        for i in range(n):
            e = [0] * n
            e[i] = 1
            terms.append((tuple(e), float(lin[i])))
        for i in range(n):
            for j in range(n):
                e = [0] * n
                e[i] += 1
                e[j] += 1
                terms.append((tuple(e), float(Q[i, j])))
        objectives.append(Poly(n, terms))

    if preference is None:
        preference = Poly(
            n, [(tuple(2 if j == i else 0 for j in range(n)), 1.0) for i in range(n)]
        )
    constraints = [Poly.var(i, n) for i in range(n)]
    return MopProblem(
        n=n,
        preference=preference,
        objectives=objectives,
        constraints=constraints,
        structure=NonnegOrthant(),
    )


def gen_miso_random(p: int, n1: int, n2: int, seed: int = 0) -> MopProblem:
    rng = np.random.default_rng(seed)
    mats = [rng.standard_normal((n1, n2)) for _ in range(p)]
    y = rng.standard_normal(n1)
    return gen_miso(mats, y)


def _truncated_tanh(t: Poly, degree: int) -> Poly:
    if degree == 3:
        return t - t**3 * (1.0 / 3.0)
    if degree == 5:
        return t - t**3 * (1.0 / 3.0) + t**5 * (2.0 / 15.0)
    raise ProblemFormatError("tanh truncation degree must be 3 or 5")


def gen_mimo_autoencoder(
    X_list: Sequence[np.ndarray], tanh_degree: int = 3
) -> MopProblem:
    """One-layer autoencoder losses as a MOP over the weights (A, b).

    Variables are vec(A) row-major then b.  For each task vector X^(i), the
    reconstruction is sigma(A relu(X^(i)) + b) with sigma the truncated tanh;
    the loss is the squared reconstruction error.  Weights are confined to
    unit balls, whose one-sided inverse is supplied in closed form.
    """
    data = [np.asarray(X, dtype=float).ravel() for X in X_list]
    if not data:
        raise ProblemFormatError("need at least one task vector")
    n = data[0].shape[0]
    for X in data:
        if X.shape[0] != n:
            raise ProblemFormatError("task vectors must share the dimension")
    nv = n * n + n

    def avar(j, k):
        return Poly.var(j * n + k, nv)

    def bvar(j):
        return Poly.var(n * n + j, nv)

    objectives, bias_terms = [], Poly(nv)
    for X in data:
        relu = np.maximum(X, 0.0)
        loss = Poly(nv)
        for j in range(n):
            z = bvar(j)
            for k in range(n):
                if relu[k]:
                    z = z + avar(j, k) * float(relu[k])
            out = _truncated_tanh(z, tanh_degree)
            diff = out - float(X[j])
            loss = loss + diff * diff
            bias_terms = bias_terms + (float(X[j]) - out)
        objectives.append(loss)

    ca = Poly.const(nv, 1.0)
    for j in range(n):
        for k in range(n):
            ca = ca - avar(j, k) ** 2
    cb = Poly.const(nv, 1.0)
    for j in range(n):
        cb = cb - bvar(j) ** 2

    zero = Poly(nv)
    row_a = [avar(j, k) * -0.5 for j in range(n) for k in range(n)] + [zero] * n
    row_b = [zero] * (n * n) + [bvar(j) * -0.5 for j in range(n)]
    one, zz = Poly.const(nv, 1.0), zero
    structure = Custom(
        cprime1=(tuple(row_a), tuple(row_b)),
        cprime2=((one, zz), (zz, one)),
    )
    return MopProblem(
        n=nv,
        preference=bias_terms,
        objectives=objectives,
        constraints=[ca, cb],
        structure=structure,
    )


def gen_mimo_random(p: int, n: int, tanh_degree: int = 3, seed: int = 0) -> MopProblem:
    rng = np.random.default_rng(seed)
    return gen_mimo_autoencoder(
        [rng.standard_normal(n) for _ in range(p)], tanh_degree
    )


# ---------------------------------------------------------------------------
# Result reports


def result_to_json(res: OwpResult) -> str:
    cert = None
    if res.certificate is not None:
        cert = {
            "t": res.certificate.t,
            "rank_t": res.certificate.rank_t,
            "rank_t_minus_d0": res.certificate.rank_t_minus_d0,
            "singular_values_t": list(map(float, res.certificate.sv_t)),
            "singular_values_t_minus_d0": list(map(float, res.certificate.sv_t_minus_d0)),
            "passed": res.certificate.passed,
        }
    doc = {
        "status": res.status.value,
        "fmin": res.fmin,
        "order_used": res.order_used,
        "bounds": {str(k): v for k, v in res.bounds.items()},
        "representation": type(res.representation).__name__ if res.representation else None,
        "sdp_iterations": res.sdp_iterations,
        "certificate": cert,
        "minimizers": [
            {
                "x": list(map(float, mz.x)),
                "w": list(map(float, mz.w)),
                "lambda": list(map(float, mz.lam)),
                "f0": mz.f0,
                "kkt_residual": mz.kkt,
                "eq_residual": mz.eq_residual,
            }
            for mz in res.minimizers
        ],
    }
    return json.dumps(doc, indent=2)


def load_csv_matrix(path: str) -> np.ndarray:
    """Headerless comma-separated numeric matrix."""
    return np.loadtxt(path, delimiter=",", ndmin=2)
