"""Conic interior-point wrapper: statuses, bounds, determinism."""

from __future__ import annotations

import numpy as np
import pytest

from paretopt.sdp import SdpOptions, SdpProblem, SdpStatus, solve, sos_bound


def _prob(nvar, c, eq_A, eq_b, blocks):
    return SdpProblem(
        nvar=nvar,
        c=np.asarray(c, dtype=float),
        eq_A=np.asarray(eq_A, dtype=float).reshape(-1, nvar),
        eq_b=np.asarray(eq_b, dtype=float),
        blocks=blocks,
    )


def hankel_tail_problem():
    """min y2 subject to [[1, y1], [y1, y2]] >= 0; optimum 0 at y = 0."""
    block = {
        -1: [(0, 0, 1.0)],
        0: [(0, 1, 1.0), (1, 0, 1.0)],
        1: [(1, 1, 1.0)],
    }
    return _prob(2, [0.0, 1.0], np.zeros((0, 2)), [], [("hankel", 2, block)])


def test_schur_tail_minimum_is_zero():
    sol = solve(hankel_tail_problem())
    assert sol.status is SdpStatus.OPTIMAL
    assert sol.pobj == pytest.approx(0.0, abs=1e-7)
    assert sol.y[0] == pytest.approx(0.0, abs=1e-4)


def test_scalar_bound_constraint():
    # min y subject to y - 1 >= 0 as a 1x1 PSD block
    block = {0: [(0, 0, 1.0)], -1: [(0, 0, -1.0)]}
    sol = solve(_prob(1, [1.0], np.zeros((0, 1)), [], [("b", 1, block)]))
    assert sol.status is SdpStatus.OPTIMAL
    assert sol.pobj == pytest.approx(1.0, abs=1e-8)


def pinned_hankel_problem():
    block = {
        0: [(0, 0, 1.0)],
        1: [(0, 1, 1.0), (1, 0, 1.0)],
        2: [(1, 1, 1.0)],
    }
    eq_A = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]
    return _prob(3, [0.0, 0.0, 1.0], eq_A, [1.0, 2.0], [("m", 2, block)])


def test_pinned_moments_give_squared_ratio():
    # y0 = 1, y1 = 2, PSD forces y2 >= y1^2 / y0 = 4
    sol = solve(pinned_hankel_problem())
    assert sol.status is SdpStatus.OPTIMAL
    assert sol.pobj == pytest.approx(4.0, abs=1e-6)


def test_primal_infeasible_detected():
    # y0 = 1 while the 1x1 block demands -y0 >= 0
    block = {0: [(0, 0, -1.0)]}
    sol = solve(_prob(1, [0.0], [[1.0]], [1.0], [("neg", 1, block)]))
    assert sol.status is SdpStatus.PRIMAL_INFEASIBLE
    assert sol.y is None


def test_inconsistent_equalities_reported_without_solver():
    block = {0: [(0, 0, 1.0)]}
    prob = _prob(1, [0.0], [[1.0], [1.0]], [1.0, 2.0], [("b", 1, block)])
    sol = solve(prob)
    assert sol.status is SdpStatus.PRIMAL_INFEASIBLE
    assert sol.iterations == 0


def test_unbounded_objective_not_optimal():
    # min -y with y >= 0 only: dual infeasible / unbounded below
    block = {0: [(0, 0, 1.0)]}
    sol = solve(_prob(1, [-1.0], np.zeros((0, 1)), [], [("b", 1, block)]))
    assert sol.status in (SdpStatus.DUAL_INFEASIBLE, SdpStatus.NUMERICAL_FAILURE)


def test_optimal_gap_and_sos_bound_invariants():
    opts = SdpOptions()
    for prob in [hankel_tail_problem(), pinned_hankel_problem()]:
        sol = solve(prob, opts)
        assert sol.status is SdpStatus.OPTIMAL
        assert abs(sol.pobj - sol.dobj) <= 1e-6 * (1 + abs(sol.pobj))
        assert sos_bound(sol) <= sol.pobj + 1e-6
    bad = solve(
        _prob(1, [0.0], [[1.0], [1.0]], [1.0, 2.0], [("b", 1, {0: [(0, 0, 1.0)]})])
    )
    with pytest.raises(RuntimeError):
        bad.sos_bound()


def test_deterministic_repeat_solves():
    a = solve(pinned_hankel_problem())
    b = solve(pinned_hankel_problem())
    assert a.iterations == b.iterations
    assert np.array_equal(a.y, b.y)
    assert a.pobj == b.pobj


def test_objective_scaling_scales_value():
    base = solve(pinned_hankel_problem())
    scaled_prob = pinned_hankel_problem()
    scaled_prob.c = scaled_prob.c * 10.0
    scaled = solve(scaled_prob)
    assert scaled.status is base.status is SdpStatus.OPTIMAL
    assert scaled.pobj == pytest.approx(10.0 * base.pobj, rel=1e-6, abs=1e-6)


def test_duals_have_block_shapes():
    sol = solve(pinned_hankel_problem())
    assert sol.duals is not None and len(sol.duals) == 1
    Z = sol.duals[0]
    assert Z.shape == (2, 2)
    assert np.allclose(Z, Z.T)
    assert np.linalg.eigvalsh(Z)[0] >= -1e-8
