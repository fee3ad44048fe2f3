"""Flattening (problem, representation) into equality/inequality tuples."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_structured_problem
from paretopt.oracle import sample_wp
from paretopt.poly import Poly
from paretopt.reformulate import (
    reformulate,
    reformulate_xlambda,
    reformulate_xonly,
    reformulate_xw,
)
from paretopt.representation import (
    eliminate_all,
    lagrange_expr_xw,
    weight_expr_xlambda,
)


def test_xw_tuple_counts():
    prob = random_structured_problem("box", seed=0)
    pop = reformulate_xw(prob, lagrange_expr_xw(prob))
    n, m, l = prob.n, prob.m, prob.l
    assert pop.nvars == n + m
    assert len(pop.eqs) == n + l + 1
    assert len(pop.ineqs) == 1 + 2 * l + m
    roles = [v.role for v in pop.var_layout]
    assert roles == ["x"] * n + ["w"] * m
    assert pop.x_indices() == list(range(n))


def test_xlambda_tuple_counts():
    prob = random_structured_problem("ball", seed=1)
    pop = reformulate_xlambda(prob, weight_expr_xlambda(prob))
    n, m, l = prob.n, prob.m, prob.l
    assert pop.nvars == n + l
    assert len(pop.eqs) == n + l + 1
    assert len(pop.ineqs) == 1 + l + m + l


def test_xonly_tuple_counts(tiny_problem):
    prob = tiny_problem
    pop = reformulate_xonly(prob, eliminate_all(prob))
    n, m, l = prob.n, prob.m, prob.l
    assert pop.nvars == n
    assert len(pop.eqs) == n + l + 1
    assert len(pop.ineqs) == 1 + l + l + m


def test_dispatcher_rejects_mismatched_pairs(tiny_problem):
    rep_xonly = eliminate_all(tiny_problem)
    with pytest.raises(TypeError):
        reformulate_xw(tiny_problem, rep_xonly)
    with pytest.raises(TypeError):
        reformulate(tiny_problem, object())


def test_objective_is_lifted_verbatim():
    prob = random_structured_problem("box", seed=2)
    pop = reformulate_xw(prob, lagrange_expr_xw(prob))
    rng = np.random.default_rng(0)
    for _ in range(5):
        x = rng.uniform(-1, 1, size=prob.n)
        w = rng.dirichlet(np.ones(prob.m))
        assert pop.objective(np.concatenate([x, w])) == pytest.approx(
            prob.preference(x), rel=1e-12, abs=1e-12
        )


@given(
    st.lists(
        st.floats(min_value=0.0, max_value=1.0, allow_nan=False),
        min_size=2,
        max_size=6,
    ).filter(lambda v: sum(v) > 0)
)
def test_weight_ball_constraint_redundant_on_simplex(raw):
    """1 - ||w||^2 >= 0 holds automatically for every simplex point."""
    w = np.asarray(raw) / sum(raw)
    assert 1.0 - float(w @ w) >= -1e-12


@pytest.mark.parametrize(
    "structure,seed", [("box", 0), ("ball", 3), ("orthant", 5)]
)
def test_lifting_soundness_at_oracle_points(structure, seed):
    """Known weakly Pareto points satisfy every member of the flat system."""
    prob = random_structured_problem(structure, seed)
    rep = lagrange_expr_xw(prob)
    pop = reformulate_xw(prob, rep)
    report = sample_wp(prob, N=6)
    assert report.samples
    for s in report.samples:
        z = np.concatenate([s.x, s.w])
        for phi in pop.eqs:
            assert abs(phi(z)) <= 1e-6
        for psi in pop.ineqs:
            assert psi(z) >= -1e-6


def test_xlambda_system_linear_in_lambda():
    prob = random_structured_problem("ball", seed=1)
    pop = reformulate_xlambda(prob, weight_expr_xlambda(prob))
    n = prob.n
    for phi in pop.eqs[: n]:
        assert all(sum(a[n:]) <= 1 for a in phi.terms)


def test_d0_matches_degree_arithmetic():
    for seed, structure in enumerate(["box", "ball", "orthant", "polyhedral"]):
        prob = random_structured_problem(structure, seed)
        pop = reformulate_xw(prob, lagrange_expr_xw(prob))
        want = max(-(-p.degree() // 2) for p in [*pop.eqs, *pop.ineqs])
        assert pop.d0 == max(want, 1)


def test_d0_floor_is_one():
    from paretopt.reformulate import PolyOptProblem, VarInfo

    pop = PolyOptProblem(
        nvars=1,
        objective=Poly.var(0, 1),
        eqs=[],
        ineqs=[Poly.var(0, 1)],
        var_layout=[VarInfo("x1", "x")],
    )
    assert pop.d0 == 1


def test_variable_space_validation():
    from paretopt.reformulate import PolyOptProblem, VarInfo

    with pytest.raises(ValueError):
        PolyOptProblem(
            nvars=2,
            objective=Poly.var(0, 1),
            eqs=[],
            ineqs=[],
            var_layout=[VarInfo("x1", "x"), VarInfo("x2", "x")],
        )
