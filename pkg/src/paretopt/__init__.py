"""Polynomial optimization over the weakly Pareto set of convex multiobjective programs."""

from .poly import Poly, grlex_basis, grlex_key
from .representation import (
    Ball,
    Box,
    Custom,
    Free,
    MopProblem,
    NonnegOrthant,
    Polyhedral,
    Triangular,
    XLambda,
    XOnly,
    XW,
    eliminate_all,
    lagrange_expr_xw,
    left_poly_inverse,
    weight_expr_xlambda,
)

__all__ = [
    "Poly",
    "grlex_basis",
    "grlex_key",
    "MopProblem",
    "Box",
    "Polyhedral",
    "Triangular",
    "Ball",
    "NonnegOrthant",
    "Free",
    "Custom",
    "XW",
    "XLambda",
    "XOnly",
    "lagrange_expr_xw",
    "weight_expr_xlambda",
    "eliminate_all",
    "left_poly_inverse",
]

__version__ = "0.1.0"
