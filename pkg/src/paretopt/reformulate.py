"""Collapse (problem, representation) into one polynomial optimization problem.

The weakly Pareto membership conditions become an equality tuple Phi and an
inequality tuple Psi over a flat variable vector: (x, w), (x, lambda), or x
alone, depending on the representation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .poly import Poly
from .representation import MopProblem, Representation, XLambda, XOnly, XW


@dataclass
class VarInfo:
    name: str
    role: str  # "x", "w", or "lambda"


@dataclass
class PolyOptProblem:
    nvars: int
    objective: Poly
    eqs: list[Poly]
    ineqs: list[Poly]
    var_layout: list[VarInfo]

    def __post_init__(self):
        for p in [self.objective, *self.eqs, *self.ineqs]:
            if p.nvars != self.nvars:
                raise ValueError("all polynomials must live in the flat variable space")
        if len(self.var_layout) != self.nvars:
            raise ValueError("var_layout length must match nvars")

    @property
    def d0(self) -> int:
        """Minimal relaxation order supported by the constraint degrees."""
        d = max(
            (-(-p.degree() // 2) for p in [*self.eqs, *self.ineqs]),
            default=1,
        )
        return max(d, 1)

    def x_indices(self) -> list[int]:
        return [i for i, v in enumerate(self.var_layout) if v.role == "x"]


def _layout(n: int, aux_role: str, aux_count: int) -> list[VarInfo]:
    layout = [VarInfo(f"x{i + 1}", "x") for i in range(n)]
    sym = {"w": "w", "lambda": "lam"}.get(aux_role, aux_role)
    layout += [VarInfo(f"{sym}{i + 1}", aux_role) for i in range(aux_count)]
    return layout


def _stationarity(
    prob: MopProblem, nv: int, w: Sequence[Poly], lam: Sequence[Poly]
) -> list[Poly]:
    """sum_j w_j grad f_j - sum_i lambda_i grad c_i, componentwise in x."""
    out = []
    for r in range(prob.n):
        p = Poly(nv)
        for j, f in enumerate(prob.objectives):
            p = p + w[j] * f.diff(r).lift(nv)
        for i, c in enumerate(prob.constraints):
            p = p - lam[i] * c.diff(r).lift(nv)
        out.append(p)
    return out


def _ball_of(w: Sequence[Poly], nv: int) -> Poly:
    p = Poly.const(nv, 1.0)
    for wj in w:
        p = p - wj * wj
    return p


def reformulate_xw(prob: MopProblem, rep: XW) -> PolyOptProblem:
    if not isinstance(rep, XW):
        raise TypeError("reformulate_xw needs an XW representation")
    n, m, l = prob.n, prob.m, prob.l
    nv = n + m
    w = [Poly.var(n + j, nv) for j in range(m)]
    lam = rep.lambda_exprs
    c_lift = [c.lift(nv) for c in prob.constraints]
    eqs = _stationarity(prob, nv, w, lam)
    eqs += [lam[i] * c_lift[i] for i in range(l)]
    eqs.append(sum(w, Poly(nv)) - 1.0)
    ineqs = [_ball_of(w, nv)] + list(lam) + c_lift + w
    return PolyOptProblem(
        nvars=nv,
        objective=prob.preference.lift(nv),
        eqs=eqs,
        ineqs=ineqs,
        var_layout=_layout(n, "w", m),
    )


def reformulate_xlambda(prob: MopProblem, rep: XLambda) -> PolyOptProblem:
    if not isinstance(rep, XLambda):
        raise TypeError("reformulate_xlambda needs an XLambda representation")
    n, m, l = prob.n, prob.m, prob.l
    nv = n + l
    lam = [Poly.var(n + i, nv) for i in range(l)]
    w = rep.weight_exprs
    c_lift = [c.lift(nv) for c in prob.constraints]
    eqs = _stationarity(prob, nv, w, lam)
    eqs += [lam[i] * c_lift[i] for i in range(l)]
    eqs.append(Poly.const(nv, 1.0) - sum(w, Poly(nv)))
    ineqs = [_ball_of(w, nv)] + c_lift + list(w) + lam
    return PolyOptProblem(
        nvars=nv,
        objective=prob.preference.lift(nv),
        eqs=eqs,
        ineqs=ineqs,
        var_layout=_layout(n, "lambda", l),
    )


def reformulate_xonly(prob: MopProblem, rep: XOnly) -> PolyOptProblem:
    if not isinstance(rep, XOnly):
        raise TypeError("reformulate_xonly needs an XOnly representation")
    n, m, l = prob.n, prob.m, prob.l
    w = rep.weight_exprs
    lam = rep.lambda_exprs
    eqs = _stationarity(prob, n, w, lam)
    eqs += [lam[i] * prob.constraints[i] for i in range(l)]
    eqs.append(Poly.const(n, 1.0) - sum(w, Poly(n)))
    ineqs = [_ball_of(w, n)] + list(lam) + list(prob.constraints) + list(w)
    return PolyOptProblem(
        nvars=n,
        objective=prob.preference,
        eqs=eqs,
        ineqs=ineqs,
        var_layout=_layout(n, "x", 0),
    )


def reformulate(prob: MopProblem, rep: Representation) -> PolyOptProblem:
    if isinstance(rep, XW):
        return reformulate_xw(prob, rep)
    if isinstance(rep, XLambda):
        return reformulate_xlambda(prob, rep)
    if isinstance(rep, XOnly):
        return reformulate_xonly(prob, rep)
    raise TypeError(f"unknown representation {type(rep).__name__}")
