"""Sparse polynomial core: ring behavior, calculus, ordering, matrices."""

from __future__ import annotations

from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from paretopt.poly import (
    Poly,
    compose_affine,
    grlex_basis,
    grlex_key,
    pm_from_array,
    pm_identity_error,
    pm_mul,
    pm_shape,
)


def exponents(nvars, max_deg=4):
    return st.lists(
        st.integers(min_value=0, max_value=max_deg), min_size=nvars, max_size=nvars
    ).filter(lambda e: sum(e) <= max_deg)


def polys(nvars=2, max_terms=6, max_deg=4):
    """Integer-coefficient polynomials: float arithmetic on them is exact."""
    term = st.tuples(
        exponents(nvars, max_deg), st.integers(min_value=-9, max_value=9)
    )
    return st.lists(term, max_size=max_terms).map(
        lambda ts: Poly(nvars, [(tuple(e), float(c)) for e, c in ts])
    )


points = st.lists(
    st.floats(min_value=-2.0, max_value=2.0, allow_nan=False), min_size=2, max_size=2
).map(np.asarray)


# -- ring axioms (exact on integer coefficients) ----------------------------


@given(polys(), polys(), polys())
def test_addition_associative_commutative(p, q, r):
    assert (p + q) + r == p + (q + r)
    assert p + q == q + p


@given(polys(), polys())
def test_multiplication_commutative(p, q):
    assert p * q == q * p


@settings(deadline=None)
@given(polys(max_terms=4), polys(max_terms=4), polys(max_terms=4))
def test_distributivity(p, q, r):
    assert p * (q + r) == p * q + p * r


@given(polys())
def test_neutral_elements(p):
    n = p.nvars
    assert p + Poly.zero(n) == p
    assert p * Poly.const(n, 1.0) == p
    assert (p - p).is_zero()
    assert (p * Poly.zero(n)).is_zero()


@given(polys(), st.integers(min_value=0, max_value=4))
def test_power_is_repeated_product(p, k):
    expect = Poly.const(p.nvars, 1.0)
    for _ in range(k):
        expect = expect * p
    assert p**k == expect


# -- evaluation homomorphism ------------------------------------------------


@given(polys(), polys(), points)
def test_evaluation_respects_ring_ops(p, q, x):
    assert (p + q)(x) == pytest.approx(p(x) + q(x), rel=1e-9, abs=1e-9)
    assert (p * q)(x) == pytest.approx(p(x) * q(x), rel=1e-9, abs=1e-7)


@given(polys(), points)
def test_eval_many_matches_scalar_eval(p, x):
    assert p.eval_many(x[None, :])[0] == pytest.approx(p(x), rel=1e-12, abs=1e-12)


# -- calculus ---------------------------------------------------------------


@given(polys(), polys())
def test_product_rule_exact(p, q):
    for i in range(p.nvars):
        assert (p * q).diff(i) == p.diff(i) * q + p * q.diff(i)


@given(polys(), points)
def test_derivative_matches_finite_differences(p, x):
    h = 1e-6
    for i in range(p.nvars):
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        fd = (p(xp) - p(xm)) / (2 * h)
        assert p.diff(i)(x) == pytest.approx(fd, abs=1e-4, rel=1e-4)


def test_gradient_of_known_polynomial():
    x1, x2 = Poly.var(0, 2), Poly.var(1, 2)
    p = x1**2 * x2 + 3 * x2
    assert p.diff(0) == 2 * x1 * x2
    assert p.diff(1) == x1**2 + Poly.const(2, 3.0)


# -- graded lexicographic order ---------------------------------------------


@pytest.mark.parametrize("n,d", [(1, 5), (2, 4), (3, 3), (5, 2), (8, 2)])
def test_grlex_basis_count_and_order(n, d):
    basis = grlex_basis(n, d)
    assert len(basis) == comb(n + d, d)
    assert len(set(basis)) == len(basis)
    keys = [grlex_key(a) for a in basis]
    assert keys == sorted(keys)
    assert basis[0] == (0,) * n


def test_grlex_two_variable_prefix():
    assert grlex_basis(2, 2) == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]


# -- substitution, lifting, misc -------------------------------------------


@given(polys(), points)
def test_lift_evaluates_on_embedded_coordinates(p, x):
    z = np.concatenate([[1.5], x, [-0.5]])
    lifted = p.lift(4, offset=1)
    assert lifted(z) == pytest.approx(p(x), rel=1e-12, abs=1e-12)


def test_subs_composes_polynomials():
    x1, x2 = Poly.var(0, 2), Poly.var(1, 2)
    p = x1**2 + x2
    images = [x1 + x2, x1 * x2]
    q = p.subs(images)
    for pt in [np.array([0.3, -1.2]), np.array([1.0, 2.0])]:
        assert q(pt) == pytest.approx((pt[0] + pt[1]) ** 2 + pt[0] * pt[1], rel=1e-12)


def test_compose_affine_univariate():
    t = Poly.var(0, 1)
    outer = t - t**3 * (1.0 / 3.0)
    inner = Poly.linear([2.0, 0.0], 1.0)  # 2 x1 + 1
    comp = compose_affine(outer, inner)
    at = np.array([0.25, 7.0])
    v = 2 * 0.25 + 1
    assert comp(at) == pytest.approx(v - v**3 / 3.0, rel=1e-12)


def test_degree_and_clean():
    assert Poly.zero(3).degree() == 0
    p = Poly(1, {(3,): 1.0, (0,): 1e-15})
    assert p.degree() == 3
    assert p.clean().terms == {(3,): 1.0}


def test_invalid_construction_rejected():
    with pytest.raises(ValueError):
        Poly(2, {(1,): 1.0})
    with pytest.raises(ValueError):
        Poly(1, {(-1,): 1.0})
    with pytest.raises(IndexError):
        Poly.var(3, 2)
    with pytest.raises(ValueError):
        grlex_basis(0, 2)


# -- polynomial matrices ----------------------------------------------------


def test_pm_mul_matches_numeric_product():
    rng = np.random.default_rng(3)
    A = rng.integers(-3, 4, size=(2, 3)).astype(float)
    B = rng.integers(-3, 4, size=(3, 2)).astype(float)
    pa, pb = pm_from_array(A, 1), pm_from_array(B, 1)
    prod = pm_mul(pa, pb)
    num = np.array([[p.constant() for p in row] for row in prod])
    assert np.allclose(num, A @ B)
    assert pm_shape(prod) == (2, 2)


def test_pm_identity_error_detects_identity():
    eye = pm_from_array(np.eye(3), 2)
    assert pm_identity_error(eye) == 0.0
    eye[0][1] = Poly.var(0, 2)
    assert pm_identity_error(eye) == 1.0
