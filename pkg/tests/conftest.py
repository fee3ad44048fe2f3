"""Shared fixtures and random-instance builders for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from paretopt.poly import Poly
from paretopt.representation import (
    Ball,
    Box,
    MopProblem,
    NonnegOrthant,
    Polyhedral,
    Triangular,
)


def rng_for(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def random_objectives(rng, n: int, m: int) -> list[Poly]:
    """Convex quadratics sharing one positive definite part, integer linear shifts."""
    B = rng.standard_normal((n, n))
    Q = (B.T @ B + n * np.eye(n)) / n
    x = [Poly.var(i, n) for i in range(n)]
    quad = Poly(n)
    for i in range(n):
        for j in range(n):
            quad = quad + x[i] * x[j] * float(Q[i, j])
    d = rng.integers(-3, 4, size=(m, n)).astype(float)
    return [quad + Poly.linear(d[j]) for j in range(m)]


def random_structured_problem(structure: str, seed: int, n: int = 3, m: int = 2) -> MopProblem:
    """A random convex instance carrying the named constraint structure."""
    rng = rng_for(seed)
    objectives = random_objectives(rng, n, m)
    preference = Poly.linear(rng.integers(-2, 3, size=n).astype(float))
    x = [Poly.var(i, n) for i in range(n)]

    if structure == "box":
        a = tuple(float(v) for v in rng.uniform(0.5, 2.0, size=n))
        cons = [Poly.const(n, ai**2) - xi**2 for ai, xi in zip(a, x)]
        return MopProblem(n, preference, objectives, cons, Box(a=a))
    if structure == "ball":
        c = Poly.const(n, 1.0) - sum((xi**2 for xi in x), Poly(n))
        return MopProblem(n, preference, objectives, [c], Ball())
    if structure == "orthant":
        return MopProblem(n, preference, objectives, list(x), NonnegOrthant())
    if structure == "polyhedral":
        l = 2
        while True:
            A = rng.integers(-3, 4, size=(l, n)).astype(float)
            if np.linalg.matrix_rank(A) == l:
                break
        b = rng.integers(-2, 1, size=l).astype(float)
        cons = [Poly.linear(A[i], -b[i]) for i in range(l)]
        return MopProblem(
            n,
            preference,
            objectives,
            cons,
            Polyhedral(A=tuple(map(tuple, A)), b=tuple(b)),
        )
    if structure == "triangular":
        l = 2
        cons = []
        for i in range(l):
            alpha = float(rng.choice([-2.0, -1.0, 1.0, 2.0]))
            ci = alpha * x[i] + Poly.const(n, float(rng.integers(0, 3)))
            for j in range(i + 1, n):
                ci = ci + float(rng.integers(-2, 3)) * x[j] ** 2
            cons.append(ci)
        return MopProblem(n, preference, objectives, cons, Triangular())
    raise ValueError(structure)


STRUCTURES = ["box", "ball", "orthant", "polyhedral", "triangular"]


def refine_feasible(pop, z, active_tol: float = 1e-6, steps: int = 12) -> np.ndarray:
    """Tighten an approximately feasible point of a flat system to near-exact
    feasibility by Gauss-Newton on the equalities plus the active inequalities."""
    from paretopt.extract import gauss_newton_refine

    z = gauss_newton_refine(pop.eqs, np.asarray(z, dtype=float), steps=steps)
    active = [p for p in pop.ineqs if p(z) <= active_tol]
    if active:
        z = gauss_newton_refine(list(pop.eqs) + active, z, steps=steps)
    return z


# Scoreboard for the end-to-end acceptance checks: each check records one
# PASS/FAIL line here, and the lines are echoed after the run (file-descriptor
# level capture would swallow direct writes from inside the tests).
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance checks")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def tiny_problem():
    """2-variable, 2-objective instance with a closed-form representation."""
    from paretopt.benchmarks import parabolic_region_two_objectives

    return parabolic_region_two_objectives()
