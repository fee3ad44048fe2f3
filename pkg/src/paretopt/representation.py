"""Representations of the weakly Pareto set of a convex multiobjective program.

A convex MOP  min (f_1..f_m) s.t. c_1..c_l >= 0  has its weakly Pareto set
described by scalarization KKT systems.  Depending on which polynomial matrix
admits a one-sided inverse, the multiplier vector, the weight vector, or both
can be eliminated, giving three representations: in (x, w), in (x, lambda),
or in x alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Optional, Sequence

import numpy as np

from .poly import (
    Poly,
    PolyMatrix,
    grlex_basis,
    pm_identity_error,
    pm_mul,
    pm_shape,
)


class StructureError(ValueError):
    """The declared constraint structure does not match the constraints."""


class LeftInverseNotFound(RuntimeError):
    """No polynomial left inverse exists within the degree budget."""


# ---------------------------------------------------------------------------
# Constraint structures


@dataclass(frozen=True)
class Box:
    """c_i = a_i^2 - x_i^2 for every variable; requires l = n."""

    a: tuple[float, ...]


@dataclass(frozen=True)
class Polyhedral:
    """c_i = a_i^T x - b_i with linearly independent rows a_i."""

    A: tuple[tuple[float, ...], ...]
    b: tuple[float, ...]


@dataclass(frozen=True)
class Triangular:
    """c_i = alpha_i x_i + q_i(x_{i+1}, ..., x_n) with alpha_i != 0."""


@dataclass(frozen=True)
class Ball:
    """Single constraint c = 1 - ||x||^2."""


@dataclass(frozen=True)
class NonnegOrthant:
    """c_i = x_i for every variable; requires l = n."""


@dataclass(frozen=True)
class Free:
    """No constraints."""


@dataclass(frozen=True)
class Custom:
    """User-supplied one-sided inverse C' = [cprime1 | cprime2] verified at load."""

    cprime1: tuple  # l x n nested tuple of Poly
    cprime2: Optional[tuple] = None  # l x l nested tuple of Poly, defaults to zero


ConstraintStructure = Box | Polyhedral | Triangular | Ball | NonnegOrthant | Free | Custom


@dataclass
class MopProblem:
    n: int
    preference: Poly
    objectives: list[Poly]
    constraints: list[Poly]
    structure: ConstraintStructure
    convex_asserted: bool = True

    def __post_init__(self):
        if self.n < 1 or not self.objectives:
            raise ValueError("need n >= 1 and at least one objective")
        for p in [self.preference, *self.objectives, *self.constraints]:
            if p.nvars != self.n:
                raise ValueError("all polynomials must share the ambient variable count")
        if not isinstance(self.structure, Free):
            err = pm_identity_error(pm_mul(cprime(self), constraint_matrix(self)))
            if err > 1e-9:
                raise StructureError(
                    f"one-sided inverse identity C'(x)C(x)=I fails (max coeff error {err:.2e})"
                )
        elif self.constraints:
            raise StructureError("Free structure requires an empty constraint list")

    @property
    def m(self) -> int:
        return len(self.objectives)

    @property
    def l(self) -> int:
        return len(self.constraints)


def constraint_matrix(prob: MopProblem) -> PolyMatrix:
    """The (n+l) x l matrix C(x) stacking constraint gradients over diag(c)."""
    n, l = prob.n, prob.l
    C = [[Poly(n) for _ in range(l)] for _ in range(n + l)]
    for i, ci in enumerate(prob.constraints):
        for r in range(n):
            C[r][i] = ci.diff(r)
        C[n + i][i] = ci
    return C


def _expected_box(prob: MopProblem, a: Sequence[float]) -> None:
    n = prob.n
    if prob.l != n or len(a) != n:
        raise StructureError("Box structure needs one constraint per variable")
    for i, ci in enumerate(prob.constraints):
        want = Poly.const(n, a[i] ** 2) - Poly.var(i, n) ** 2
        if ci.norm_inf_diff(want) > 1e-9:
            raise StructureError(f"constraint {i} is not a_i^2 - x_i^2")


def cprime(prob: MopProblem) -> PolyMatrix:
    """The l x (n+l) one-sided inverse C'(x) induced by the structure."""
    n, l = prob.n, prob.l
    st = prob.structure
    zero = Poly(n)

    if isinstance(st, Free):
        return []

    if isinstance(st, Box):
        _expected_box(prob, st.a)
        rows = []
        for i in range(n):
            row = [zero] * (n + l)
            row = list(row)
            row[i] = Poly.var(i, n) * (-1.0 / (2 * st.a[i] ** 2))
            row[n + i] = Poly.const(n, 1.0 / st.a[i] ** 2)
            rows.append(row)
        return rows

    if isinstance(st, Polyhedral):
        A = np.asarray(st.A, dtype=float)
        b = np.asarray(st.b, dtype=float)
        if A.shape != (l, n) or b.shape != (l,):
            raise StructureError("Polyhedral data dimensions do not match the problem")
        if np.linalg.matrix_rank(A, tol=1e-10) < l:
            raise StructureError("Polyhedral structure needs full row-rank A")
        for i, ci in enumerate(prob.constraints):
            want = Poly.linear(A[i], -b[i])
            if ci.norm_inf_diff(want) > 1e-9:
                raise StructureError(f"constraint {i} is not a_i^T x - b_i")
        C1 = np.linalg.solve(A @ A.T, A)  # (A A^T)^{-1} A, l x n
        return [
            [Poly.const(n, C1[i, r]) for r in range(n)] + [zero] * l for i in range(l)
        ]

    if isinstance(st, Ball):
        if l != 1:
            raise StructureError("Ball structure needs exactly one constraint")
        want = Poly.const(n, 1.0) - sum(
            (Poly.var(i, n) ** 2 for i in range(n)), Poly(n)
        )
        if prob.constraints[0].norm_inf_diff(want) > 1e-9:
            raise StructureError("constraint is not 1 - ||x||^2")
        return [[Poly.var(i, n) * -0.5 for i in range(n)] + [Poly.const(n, 1.0)]]

    if isinstance(st, NonnegOrthant):
        if l != n:
            raise StructureError("NonnegOrthant needs one constraint per variable")
        for i, ci in enumerate(prob.constraints):
            if ci.norm_inf_diff(Poly.var(i, n)) > 1e-9:
                raise StructureError(f"constraint {i} is not x_i")
        rows = []
        for i in range(n):
            row = [zero] * (n + l)
            row[i] = Poly.const(n, 1.0)
            rows.append(row)
        return rows

    if isinstance(st, Triangular):
        alphas = []
        for i, ci in enumerate(prob.constraints):
            if i >= n:
                raise StructureError("Triangular structure needs l <= n")
            ei = tuple(1 if r == i else 0 for r in range(n))
            alpha = ci.coeff(ei)
            if alpha == 0.0:
                raise StructureError(f"constraint {i} lacks a linear x_{i + 1} term")
            for a in ci.terms:
                if a == ei:
                    continue
                if any(a[r] for r in range(i + 1)):
                    raise StructureError(
                        f"constraint {i} involves variables x_1..x_{i + 1} beyond the linear term"
                    )
            alphas.append(alpha)
        # T(x): first l rows of the gradient matrix, lower triangular,
        # constant diagonal; invert by forward substitution.
        T = [[prob.constraints[i].diff(r) for i in range(l)] for r in range(l)]
        Tinv = [[Poly(n) for _ in range(l)] for _ in range(l)]
        for j in range(l):
            for i in range(l):
                acc = Poly.const(n, 1.0) if i == j else Poly(n)
                for r in range(i):
                    acc = acc - T[i][r] * Tinv[r][j]
                Tinv[i][j] = acc * (1.0 / alphas[i])
        return [list(Tinv[i]) + [zero] * (n - l) + [zero] * l for i in range(l)]

    if isinstance(st, Custom):
        C1 = [list(row) for row in st.cprime1]
        if pm_shape(C1) != (l, n):
            raise StructureError("custom cprime1 must be l x n")
        if st.cprime2 is not None:
            C2 = [list(row) for row in st.cprime2]
            if pm_shape(C2) != (l, l):
                raise StructureError("custom cprime2 must be l x l")
        else:
            C2 = [[zero] * l for _ in range(l)]
        return [C1[i] + C2[i] for i in range(l)]

    raise StructureError(f"unsupported structure {type(st).__name__}")


def cprime1_rows(prob: MopProblem) -> list[list[Poly]]:
    """Rows ell_i(x)^T of the first n columns of C'(x)."""
    return [row[: prob.n] for row in cprime(prob)]


def u_matrix(prob: MopProblem) -> list[list[Poly]]:
    """u_ij(x) = ell_i(x)^T grad f_j(x), an l x m array of polynomials."""
    grads = [f.gradient() for f in prob.objectives]
    rows = cprime1_rows(prob)
    out = []
    for ell in rows:
        out.append(
            [
                sum((ell[r] * grads[j][r] for r in range(prob.n)), Poly(prob.n))
                for j in range(prob.m)
            ]
        )
    return out


# ---------------------------------------------------------------------------
# Representations


@dataclass
class XW:
    """Multipliers eliminated: lambda_i(x, w), variables (x_1..x_n, w_1..w_m)."""

    n: int
    m: int
    l: int
    lambda_exprs: list[Poly]  # in n+m variables, degree 1 in w

    @property
    def nvars(self) -> int:
        return self.n + self.m

    def split(self, prob: MopProblem, point: Sequence[float]):
        point = np.asarray(point, dtype=float)
        x, w = point[: self.n], point[self.n :]
        lam = np.array([p(point) for p in self.lambda_exprs])
        return x, w, lam


@dataclass
class XLambda:
    """Weights eliminated: w_j(x, lambda), variables (x_1..x_n, lambda_1..lambda_l)."""

    n: int
    m: int
    l: int
    weight_exprs: list[Poly]  # in n+l variables, degree 1 in lambda

    @property
    def nvars(self) -> int:
        return self.n + self.l

    def split(self, prob: MopProblem, point: Sequence[float]):
        point = np.asarray(point, dtype=float)
        x, lam = point[: self.n], point[self.n :]
        w = np.array([p(point) for p in self.weight_exprs])
        return x, w, lam


@dataclass
class XOnly:
    """Both eliminated: w_j(x) and lambda_i(x), variables x only."""

    n: int
    m: int
    l: int
    weight_exprs: list[Poly]
    lambda_exprs: list[Poly]

    @property
    def nvars(self) -> int:
        return self.n

    def split(self, prob: MopProblem, point: Sequence[float]):
        x = np.asarray(point, dtype=float)
        w = np.array([p(x) for p in self.weight_exprs])
        lam = np.array([p(x) for p in self.lambda_exprs])
        return x, w, lam


Representation = XW | XLambda | XOnly


def lagrange_expr_xw(prob: MopProblem) -> XW:
    """lambda_i(x, w) = sum_j w_j ell_i(x)^T grad f_j(x)."""
    n, m, l = prob.n, prob.m, prob.l
    if isinstance(prob.structure, Free):
        # No constraints, no multipliers: the (x, w) system is stationarity
        # of the scalarization plus the simplex conditions alone.
        return XW(n=n, m=m, l=0, lambda_exprs=[])
    nv = n + m
    U = u_matrix(prob)
    lams = []
    for i in range(l):
        lam = Poly(nv)
        for j in range(m):
            lam = lam + U[i][j].lift(nv) * Poly.var(n + j, nv)
        lams.append(lam)
    return XW(n=n, m=m, l=l, lambda_exprs=lams)


@dataclass
class LinearTermStructure:
    """Objectives sharing one convex part: f_i = h + d_i^T x."""

    h: Poly
    d: np.ndarray  # m x n
    D: np.ndarray  # (n+1) x m, columns [d_i; 1]


def linear_term_structure(prob: MopProblem, tol: float = 1e-9) -> Optional[LinearTermStructure]:
    """Detect f_i = h + d_i^T x; returns None when objectives differ nonlinearly."""
    n, m = prob.n, prob.m
    d = np.zeros((m, n))
    for j, f in enumerate(prob.objectives):
        for i in range(n):
            e = tuple(1 if r == i else 0 for r in range(n))
            d[j, i] = f.coeff(e)
    h = prob.objectives[0] - Poly.linear(d[0])
    for j, f in enumerate(prob.objectives):
        if (f - Poly.linear(d[j]) - h).max_abs_coeff() > tol:
            return None
    D = np.vstack([d.T, np.ones((1, m))])
    return LinearTermStructure(h=h, d=d, D=D)


def weight_expr_xlambda(prob: MopProblem, qprime: Optional[PolyMatrix] = None) -> XLambda:
    """Weight expression w(x, lambda), degree 1 in lambda.

    Either the objectives have the shared-convex-part form f_i = h + d_i^T x
    (then w = (D^T D)^{-1} D^T (h1_hat + h2_hat)), or a verified left inverse
    Q'(x) of Q(x) = [grad f_1 .. grad f_m; 1 .. 1] is supplied.
    """
    n, m, l = prob.n, prob.m, prob.l
    nv = n + l
    if m == 1:
        return XLambda(n=n, m=1, l=l, weight_exprs=[Poly.const(nv, 1.0)])

    cgrads = [c.gradient() for c in prob.constraints]

    if qprime is not None:
        Q = [[prob.objectives[j].diff(r) for j in range(m)] for r in range(n)]
        Q.append([Poly.const(n, 1.0)] * m)
        err = pm_identity_error(pm_mul(qprime, Q))
        if err > 1e-8:
            raise StructureError(f"supplied Q'(x) fails Q'Q = I (error {err:.2e})")
        ws = []
        for j in range(m):
            wj = qprime[j][n].lift(nv)  # Q'_2 column
            for i in range(l):
                qrow = sum(
                    (qprime[j][r] * cgrads[i][r] for r in range(n)), Poly(n)
                )
                wj = wj + qrow.lift(nv) * Poly.var(n + i, nv)
            ws.append(wj)
        return XLambda(n=n, m=m, l=l, weight_exprs=ws)

    lts = linear_term_structure(prob)
    if lts is None:
        raise StructureError(
            "objectives do not share a common convex part and no Q'(x) was supplied"
        )
    D = lts.D
    if np.linalg.matrix_rank(D, tol=1e-10) < m:
        raise StructureError("the matrix D = [d_1..d_m; 1..1] is rank deficient")
    M = np.linalg.solve(D.T @ D, D.T)  # m x (n+1)
    # rhs_r, r = 0..n-1: -grad h + sum_i lambda_i grad c_i; rhs_n = 1
    rhs = []
    for r in range(n):
        p = (-lts.h.diff(r)).lift(nv)
        for i in range(l):
            p = p + cgrads[i][r].lift(nv) * Poly.var(n + i, nv)
        rhs.append(p)
    rhs.append(Poly.const(nv, 1.0))
    ws = []
    for j in range(m):
        wj = Poly(nv)
        for r in range(n + 1):
            wj = wj + rhs[r] * M[j, r]
        ws.append(wj.clean())
    return XLambda(n=n, m=m, l=l, weight_exprs=ws)


def build_P_matrix(prob: MopProblem) -> PolyMatrix:
    """The (n+l+1) x m matrix P(x) whose kernel equation P(x) w = e_{n+l+1}
    encodes stationarity, complementarity, and the simplex normalization."""
    n, m, l = prob.n, prob.m, prob.l
    fgrads = [f.gradient() for f in prob.objectives]
    P = [[Poly(n) for _ in range(m)] for _ in range(n + l + 1)]
    if l == 0:
        for r in range(n):
            for j in range(m):
                P[r][j] = -fgrads[j][r]
    else:
        U = u_matrix(prob)
        cgrads = [c.gradient() for c in prob.constraints]
        for r in range(n):
            for j in range(m):
                acc = -fgrads[j][r]
                for i in range(l):
                    acc = acc + U[i][j] * cgrads[i][r]
                P[r][j] = acc
        for i in range(l):
            for j in range(m):
                P[n + i][j] = U[i][j] * prob.constraints[i]
    for j in range(m):
        P[n + l][j] = Poly.const(n, 1.0)
    return P


def _l1_exact_solution(A: np.ndarray, b: np.ndarray) -> Optional[np.ndarray]:
    """Minimum-L1-norm solution of a consistent linear system, or None."""
    from scipy.optimize import linprog

    nv = A.shape[1]
    cost = np.concatenate([np.zeros(nv), np.ones(nv)])
    I = np.eye(nv)
    A_ub = np.vstack([np.hstack([I, -I]), np.hstack([-I, -I])])
    res = linprog(
        cost,
        A_ub=A_ub,
        b_ub=np.zeros(2 * nv),
        A_eq=np.hstack([A, np.zeros_like(A)]),
        b_eq=b,
        bounds=[(None, None)] * nv + [(0, None)] * nv,
        method="highs",
    )
    if res.status != 0:
        return None
    theta = res.x[:nv]
    if np.max(np.abs(A @ theta - b)) > 1e-8 * max(1.0, np.max(np.abs(b))):
        return None
    return theta


def left_poly_inverse(Pm: PolyMatrix, max_degree: int = 2) -> Optional[PolyMatrix]:
    """Search for P'(x) with entries of degree <= max_degree and P' Pm = I.

    The identity is a linear system in the unknown coefficients of P'; it is
    solved by least squares degree by degree, and a candidate is only accepted
    after the symbolic product is re-verified.  Returns None when no exact
    inverse exists within the degree budget.
    """
    R, m = pm_shape(Pm)
    if R <= m:
        raise ValueError("left inverse needs strictly more rows than columns")
    n = Pm[0][0].nvars
    degP = max(p.degree() for row in Pm for p in row)
    scale = max(p.max_abs_coeff() for row in Pm for p in row)
    if scale == 0.0:
        return None

    for d in range(max_degree + 1):
        basis = grlex_basis(n, d)
        nb = len(basis)
        out_basis = grlex_basis(n, d + degP)
        out_index = {a: i for i, a in enumerate(out_basis)}
        nrows = m * len(out_basis)
        A = np.zeros((nrows, R * nb))
        for c in range(R):
            for j in range(m):
                for gamma, cg in Pm[c][j].terms.items():
                    for bi, beta in enumerate(basis):
                        tot = tuple(g + bb for g, bb in zip(gamma, beta))
                        A[j * len(out_basis) + out_index[tot], c * nb + bi] += cg
        B = np.zeros((nrows, m))
        zero_idx = out_index[(0,) * n]
        for r in range(m):
            B[r * len(out_basis) + zero_idx, r] = 1.0
        theta, *_ = np.linalg.lstsq(A, B, rcond=None)
        resid = np.max(np.abs(A @ theta - B))
        if resid > 1e-8 * max(1.0, scale):
            continue
        # The solution space can be large; a sparsest (L1-minimal) exact
        # solution keeps the eliminated expressions low-weight and close to
        # the structured closed forms, which markedly tightens the downstream
        # relaxations.  Fall back to the least-norm solution per row.
        for r in range(m):
            theta_l1 = _l1_exact_solution(A, B[:, r])
            if theta_l1 is not None:
                theta[:, r] = theta_l1
        theta[np.abs(theta) <= 1e-9 * max(1.0, np.max(np.abs(theta)))] = 0.0
        Pp = [
            [
                Poly(n, {basis[bi]: theta[c * nb + bi, r] for bi in range(nb)})
                for c in range(R)
            ]
            for r in range(m)
        ]
        if pm_identity_error(pm_mul(Pp, Pm)) <= 1e-7:
            return Pp
    return None


def eliminate_all(prob: MopProblem, max_degree: int = 2) -> XOnly:
    """Fully eliminated representation: w(x) = P'(x) e_{n+l+1}, lambda_i(x) = sum_j w_j u_ij."""
    n, m, l = prob.n, prob.m, prob.l
    P = build_P_matrix(prob)
    Pp = left_poly_inverse(P, max_degree)
    if Pp is None:
        raise LeftInverseNotFound(
            f"no left inverse of P(x) with entry degree <= {max_degree}"
        )
    ws = [Pp[j][n + l] for j in range(m)]
    if l == 0:
        lams = []
    else:
        U = u_matrix(prob)
        lams = [
            sum((ws[j] * U[i][j] for j in range(m)), Poly(n)).clean() for i in range(l)
        ]
    return XOnly(n=n, m=m, l=l, weight_exprs=ws, lambda_exprs=lams)


def kkt_residual(prob: MopProblem, rep: Representation, point: Sequence[float]) -> float:
    """Worst violation of the scalarization KKT system at a lifted point.

    Covers stationarity, complementarity, sign conditions on lambda, c, w,
    and the simplex normalization.
    """
    point = np.asarray(point, dtype=float)
    if point.shape != (rep.nvars,):
        raise ValueError(f"point length {point.shape} != representation space {rep.nvars}")
    x, w, lam = rep.split(prob, point)
    fgrad = np.array([[f.diff(r)(x) for r in range(prob.n)] for f in prob.objectives])
    stat = w @ fgrad
    cvals = np.array([c(x) for c in prob.constraints])
    if prob.l:
        cgrad = np.array(
            [[c.diff(r)(x) for r in range(prob.n)] for c in prob.constraints]
        )
        stat = stat - lam @ cgrad
    res = np.max(np.abs(stat)) if prob.n else 0.0
    if prob.l:
        res = max(res, np.max(np.abs(lam * cvals)))
        res = max(res, np.max(np.maximum(0.0, -lam)))
        res = max(res, np.max(np.maximum(0.0, -cvals)))
    res = max(res, np.max(np.maximum(0.0, -w)))
    res = max(res, abs(np.sum(w) - 1.0))
    return float(res)


def check_convexity(
    prob: MopProblem, nsamples: int = 50, tol: float = -1e-7, seed: int = 0
) -> list[str]:
    """Spot-check convexity of objectives / concavity of constraints.

    Hessians are sampled at random points in [-1, 1]^n; violations come back
    as warning strings (the representations stay valid necessary conditions).
    """
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-1.0, 1.0, size=(nsamples, prob.n))
    warnings = []

    def min_hessian_eig(p: Poly) -> float:
        H = [[p.diff(i).diff(j) for j in range(prob.n)] for i in range(prob.n)]
        worst = np.inf
        for pt in pts:
            Hv = np.array([[H[i][j](pt) for j in range(prob.n)] for i in range(prob.n)])
            worst = min(worst, float(np.linalg.eigvalsh(Hv)[0]))
        return worst

    for j, f in enumerate(prob.objectives):
        if min_hessian_eig(f) < tol:
            warnings.append(f"objective {j + 1} looks nonconvex at sampled points")
    for i, c in enumerate(prob.constraints):
        if min_hessian_eig(-c) < tol:
            warnings.append(f"constraint {i + 1} looks nonconcave at sampled points")
    return warnings
