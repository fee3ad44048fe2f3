"""Benchmark problem gallery.

Hand-picked convex multiobjective instances exercising every constraint
structure and representation path, plus seeded random instance generators
used by the experiment scripts and the test suite.
"""

from __future__ import annotations

import numpy as np

from .poly import Poly
from .representation import (
    Ball,
    Box,
    Custom,
    Free,
    MopProblem,
    NonnegOrthant,
    Polyhedral,
)


def _vars(n):
    return [Poly.var(i, n) for i in range(n)]


def hypercube_two_objectives() -> MopProblem:
    """8 variables on the unit hypercube; certifies at order 3."""
    n = 8
    x = _vars(n)
    f0 = (x[0] - x[1] + x[6] ** 2 - x[7]) ** 2 - (x[2] - x[3] - 2 * x[4] - 4 * x[5]) ** 3
    f1 = sum((xi**2 for xi in x), Poly(n)) - sum(x, Poly(n))
    f2 = (x[0] - x[1]) ** 2 + (x[2] - x[3]) ** 2 + (x[4] - x[5]) ** 2
    return MopProblem(
        n=n,
        preference=f0,
        objectives=[f1, f2],
        constraints=[Poly.const(n, 1.0) - xi**2 for xi in x],
        structure=Box(a=(1.0,) * n),
    )


def polyhedron_two_objectives() -> MopProblem:
    """6 variables over a polyhedral cone; certifies at order 2."""
    n = 6
    x = _vars(n)
    f0 = (x[0] ** 2 - 3.0) * (x[1] + 1.0) - 3 * x[2] * x[3] - x[4] ** 2 * x[5]
    f1 = (x[0] + 2 * x[1]) ** 2 + (x[2] + 3 * x[3]) ** 2 + x[4]
    f2 = x[0] + x[1] + (x[2] - 0.5 * x[3] + x[5]) ** 2
    A = (
        (-0.5, -1.0, 3.0, 1.0, 1.0, -1.0),
        (2.0, -0.5, 0.0, 5.0, 2.0, 3.0),
        (-2.0, -1.0, -4.0, 3.0, 6.0, -7.0 / 3.0),
        (-9.0 / 4.0, -5.0 / 2.0, -1.0, 2.0, 2.0, 8.0 / 3.0),
        (2.0, -8.0 / 3.0, 4.0, 0.0, 5.0 / 2.0, -5.0),
    )
    b = (0.0,) * 5
    constraints = [Poly.linear(row) for row in A]
    return MopProblem(
        n=n,
        preference=f0,
        objectives=[f1, f2],
        constraints=constraints,
        structure=Polyhedral(A=A, b=b),
    )


def ball_six_objectives() -> MopProblem:
    """8 variables on the unit ball, six objectives sharing one convex part."""
    n = 8
    x = _vars(n)
    f0 = -sum((xi**4 for xi in x), Poly(n)) + x[0] * x[2] ** 2 - x[0]
    h = (
        x[0] ** 2
        + 2 * x[0] * x[1]
        + x[0] * x[2]
        + 2 * x[1] ** 2
        + 2 * x[2] ** 2
        + x[4]
        + x[5] ** 2
    )
    shifts = [
        x[0] + 2 * x[1] + 5 * x[4],
        2 * x[1] + x[2] - x[3],
        x[6] + x[7],
        x[4] + x[5] + x[6] - 3 * x[7],
        -3 * x[0] - 3 * x[3],
        x[2] - x[7],
    ]
    ball = Poly.const(n, 1.0) - sum((xi**2 for xi in x), Poly(n))
    return MopProblem(
        n=n,
        preference=f0,
        objectives=[h + s for s in shifts],
        constraints=[ball],
        structure=Ball(),
    )


def weighted_quadratic_four_objectives() -> MopProblem:
    """10 variables, one concave quadratic constraint, full elimination to x."""
    n = 10
    x = _vars(n)
    f0 = x[0] ** 2 * x[1] + x[1] ** 2 * x[2] - 3 * x[3] * x[4] * x[5] + x[9] ** 2
    h = sum(((i + 1) * x[i] ** 2 for i in range(n)), Poly(n))
    shifts = [
        3 * x[0] + 4 * x[1] + x[4],
        -2 * x[7] - x[8],
        2 * x[9] - 3 * x[6],
        x[4] - x[3] - x[2],
    ]
    c = Poly.const(n, 1.0) - 2 * x[0] ** 2 - x[2] ** 2 + x[4] + x[6]
    # ell with ell^T grad(c) = 1: grad(c) has a constant 1 in coordinate 5
    ell = tuple(Poly.const(n, 1.0 if i == 4 else 0.0) for i in range(n))
    return MopProblem(
        n=n,
        preference=f0,
        objectives=[h + s for s in shifts],
        constraints=[c],
        structure=Custom(cprime1=(ell,)),
    )


def shifted_norm_three_objectives() -> MopProblem:
    """10 variables, squared norm plus linear shifts, one mixed constraint."""
    n = 10
    x = _vars(n)
    sq = sum((xi**2 for xi in x), Poly(n))
    f0 = sq - 4 * (
        x[0] ** 2 * x[1] ** 2
        + x[1] ** 2 * x[2] ** 2
        + x[2] ** 2 * x[3] ** 2
        + x[4] ** 2 * x[0] ** 2
    )
    d = [
        (0, 4, 1, 2, 3, 3, 4, 0, 0, 3),
        (3, 2, 1, 1, 2, 5, 4, 2, 0, 2),
        (4, 1, 2, 3, 1, 5, 3, 5, 1, 1),
    ]
    objectives = [sq + Poly.linear([float(v) for v in di]) for di in d]
    c = (
        Poly.const(n, 1.0)
        - x[0] ** 2
        - x[1] ** 2
        - x[2] ** 2
        - x[3]
        - x[4]
        - x[9]
    )
    # grad(c) has a constant -1 in coordinate 4, so ell = -e_4 works
    ell = tuple(Poly.const(n, -1.0 if i == 3 else 0.0) for i in range(n))
    return MopProblem(
        n=n,
        preference=f0,
        objectives=objectives,
        constraints=[c],
        structure=Custom(cprime1=(ell,)),
    )


def parabolic_region_two_objectives() -> MopProblem:
    """Tiny 2-variable instance with a closed-form weight expression."""
    n = 2
    x1, x2 = _vars(n)
    f1 = x1**2 + x2**2 + x1 - 2 * x2
    f2 = x1**2 + x2**2 + 2 * x1 - 2 * x2
    c = Poly.const(n, 1.0) - x1**2 - x2
    ell = (Poly.const(n, 0.0), Poly.const(n, -1.0))
    return MopProblem(
        n=n,
        preference=x1 + x2,
        objectives=[f1, f2],
        constraints=[c],
        structure=Custom(cprime1=(ell,)),
    )


def random_convex_quadratic(
    n: int = 5, m: int = 2, seed: int = 0, structure: str = "ball"
) -> MopProblem:
    """Seeded random convex quadratics sharing one positive definite part.

    Objectives are x^T Q x + d_i^T x with a common random Q >> 0, so every
    representation path (including full elimination) applies.
    """
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((n, n))
    Q = B.T @ B + n * np.eye(n)
    Q /= n
    d = rng.integers(-3, 4, size=(m, n)).astype(float)
    d0 = rng.integers(-3, 4, size=n).astype(float)
    x = _vars(n)
    quad = Poly(n)
    for i in range(n):
        for j in range(n):
            quad = quad + x[i] * x[j] * float(Q[i, j])
    objectives = [quad + Poly.linear(d[i]) for i in range(m)]
    f0 = Poly.linear(d0)
    if structure == "ball":
        c = Poly.const(n, 1.0) - sum((xi**2 for xi in x), Poly(n))
        return MopProblem(
            n=n, preference=f0, objectives=objectives, constraints=[c], structure=Ball()
        )
    if structure == "box":
        return MopProblem(
            n=n,
            preference=f0,
            objectives=objectives,
            constraints=[Poly.const(n, 1.0) - xi**2 for xi in x],
            structure=Box(a=(1.0,) * n),
        )
    if structure == "orthant":
        return MopProblem(
            n=n,
            preference=f0,
            objectives=objectives,
            constraints=list(x),
            structure=NonnegOrthant(),
        )
    if structure == "free":
        return MopProblem(
            n=n, preference=f0, objectives=objectives, constraints=[], structure=Free()
        )
    raise ValueError(f"unknown structure {structure!r}")
