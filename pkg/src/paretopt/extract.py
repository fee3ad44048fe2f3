"""Flat-truncation certification, atomic-measure extraction, and the
relaxation-order loop that solves the optimization over the weakly Pareto set.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .moment import Tms, assemble_sdp
from .poly import Poly, grlex_basis, grlex_key
from .reformulate import PolyOptProblem, reformulate
from .representation import (
    LeftInverseNotFound,
    MopProblem,
    Representation,
    StructureError,
    XLambda,
    XOnly,
    XW,
    eliminate_all,
    kkt_residual,
    lagrange_expr_xw,
    weight_expr_xlambda,
)
from .sdp import SdpOptions, SdpProblem, SdpSolution, SdpStatus, solve


class ExtractionFailure(RuntimeError):
    """Atom recovery from the moment matrix did not converge numerically."""


def numeric_rank(M: np.ndarray, rel_tol: float = 1e-6) -> int:
    s = np.linalg.svd(M, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s >= rel_tol * s[0]))


@dataclass
class FlatTruncationReport:
    t: int
    rank_t: int
    rank_t_minus_d0: int
    sv_t: np.ndarray
    sv_t_minus_d0: np.ndarray
    passed: bool


def flat_truncation(y: Tms, d0: int, k: int, rel_tol: float = 1e-6) -> FlatTruncationReport:
    """Scan t = d0..k for rank M_t = rank M_{t-d0}; first pass wins."""
    if d0 > k:
        raise ValueError("need d0 <= k")
    report = None
    for t in range(d0, k + 1):
        Mt = y.moment_matrix(t)
        Ms = y.moment_matrix(t - d0)
        rt, rs = numeric_rank(Mt, rel_tol), numeric_rank(Ms, rel_tol)
        report = FlatTruncationReport(
            t=t,
            rank_t=rt,
            rank_t_minus_d0=rs,
            sv_t=np.linalg.svd(Mt, compute_uv=False),
            sv_t_minus_d0=np.linalg.svd(Ms, compute_uv=False),
            passed=(rt == rs),
        )
        if report.passed:
            return report
    return report


@dataclass
class AtomicMeasure:
    atoms: list[np.ndarray]
    weights: np.ndarray

    @property
    def r(self) -> int:
        return len(self.atoms)


_EXTRACTION_SEED = 20240709  # fixed so Schur-based atom recovery is reproducible


def extract_atoms(y: Tms, t: int, r: int, d0: int = 1) -> AtomicMeasure:
    """Recover an r-atomic representing measure from a flat moment matrix.

    The moment matrix is factored, a column-echelon monomial basis is chosen
    in graded-lex order (flatness puts all pivots at degree <= t - d0), shift
    operators for each variable are formed, and a real Schur decomposition of
    a fixed random combination diagonalizes them simultaneously.
    """
    n = y.nvars
    basis = grlex_basis(n, t)
    M = y.moment_matrix(t)
    lam, U = np.linalg.eigh(M)
    order = np.argsort(lam)[::-1][:r]
    lam_r = np.maximum(lam[order], 0.0)
    V = U[:, order] * np.sqrt(lam_r)  # s x r, M ~ V V^T

    # Row-reduce V^T scanning monomial columns in grlex order.
    W = V.T.copy()  # r x s
    pivots: list[int] = []
    tol = 1e-8 * max(1.0, float(np.max(np.abs(W))))
    row = 0
    for col in range(W.shape[1]):
        if row >= r:
            break
        piv = row + int(np.argmax(np.abs(W[row:, col])))
        if abs(W[piv, col]) <= tol:
            continue
        W[[row, piv]] = W[[piv, row]]
        W[row] /= W[row, col]
        for rr in range(r):
            if rr != row:
                W[rr] -= W[rr, col] * W[row]
        pivots.append(col)
        row += 1
    if row < r:
        raise ExtractionFailure("moment matrix factor has deficient echelon rank")

    idx = {a: i for i, a in enumerate(basis)}
    tmax = max(sum(basis[p]) for p in pivots)
    if tmax + 1 > t:
        raise ExtractionFailure("pivot monomials too high-degree for shift closure")

    shifts = []
    for v in range(n):
        Nv = np.empty((r, r))
        for j, p in enumerate(pivots):
            shifted = list(basis[p])
            shifted[v] += 1
            Nv[:, j] = W[:, idx[tuple(shifted)]]
        shifts.append(Nv)

    rng = np.random.default_rng(_EXTRACTION_SEED)
    xi = rng.normal(size=n)
    xi /= np.linalg.norm(xi)
    Nmix = sum(x * Nv for x, Nv in zip(xi, shifts))
    from scipy.linalg import schur

    T, Q = schur(Nmix, output="real")
    # complex conjugate eigenvalue pairs mean the operators fail to commute
    off = np.tril(T, -1)
    if np.max(np.abs(off)) > 1e-5 * max(1.0, np.max(np.abs(T))):
        raise ExtractionFailure("shift operators are not simultaneously triangularizable")

    atoms = []
    for i in range(r):
        q = Q[:, i]
        atoms.append(np.array([q @ Nv @ q for Nv in shifts]))

    # weights by least squares against the low-degree moments
    vand_basis = grlex_basis(n, t)
    A = np.array([[np.prod(a**np.asarray(e)) for a in atoms] for e in vand_basis])
    bvec = np.array([y.values[idx2] for idx2 in range(len(vand_basis))])
    w, *_ = np.linalg.lstsq(A, bvec, rcond=None)
    if np.any(w < -1e-4):
        raise ExtractionFailure("negative atomic weights")
    w = np.maximum(w, 0.0)
    s = w.sum()
    if s <= 0:
        raise ExtractionFailure("vanishing atomic weights")
    w /= s
    return AtomicMeasure(atoms=atoms, weights=w)


def reconstruction_residual(y: Tms, measure: AtomicMeasure, deg: int) -> float:
    """Infinity-norm mismatch between y and the measure's moments up to deg."""
    basis = grlex_basis(y.nvars, deg)
    idx = y.index()
    err = 0.0
    for e in basis:
        mom = sum(
            g * np.prod(a**np.asarray(e)) for g, a in zip(measure.weights, measure.atoms)
        )
        err = max(err, abs(mom - y.values[idx[e]]))
    return float(err)


def gauss_newton_refine(
    eqs: Sequence[Poly], point: np.ndarray, steps: int = 5
) -> np.ndarray:
    """A few Gauss-Newton steps on the equality system, absorbing SDP slack."""
    grads = [[p.diff(i) for i in range(p.nvars)] for p in eqs]
    z = np.asarray(point, dtype=float).copy()
    if not eqs:
        return z
    for _ in range(steps):
        res = np.array([p(z) for p in eqs])
        nrm = np.linalg.norm(res)
        if nrm <= 1e-14:
            break
        J = np.array([[g(z) for g in grow] for grow in grads])
        # truncate tiny singular directions: near a solution whole rows of J
        # can vanish and would otherwise blow the least-squares step up
        step, *_ = np.linalg.lstsq(J, -res, rcond=1e-8)
        scale = 1.0
        for _ in range(25):
            cand = z + scale * step
            if np.linalg.norm([p(cand) for p in eqs]) <= nrm:
                z = cand
                break
            scale *= 0.5
        else:
            break
    return z


class OwpStatus(enum.Enum):
    SOLVED = "Solved"
    INFEASIBLE_NO_WPP = "InfeasibleNoWPP"
    ORDER_LIMIT_REACHED = "OrderLimitReached"


@dataclass
class Minimizer:
    x: np.ndarray
    w: np.ndarray
    lam: np.ndarray
    f0: float
    kkt: float
    eq_residual: float


@dataclass
class OwpResult:
    status: OwpStatus
    fmin: Optional[float]
    minimizers: list[Minimizer]
    certificate: Optional[FlatTruncationReport]
    order_used: Optional[int]
    bounds: dict[int, float]
    representation: Optional[Representation] = None
    sdp_iterations: int = 0

    @property
    def solved(self) -> bool:
        return self.status is OwpStatus.SOLVED


@dataclass
class OwpOptions:
    k_max: Optional[int] = None
    rank_tol: float = 1e-4
    sdp: SdpOptions = field(default_factory=SdpOptions)
    inverse_degree: int = 2
    eq_tol: float = 1e-5
    ineq_tol: float = 1e-5
    kkt_tol: float = 1e-4


def _minimal_trace_resolve(sdp, sol: SdpSolution, opts: SdpOptions) -> Optional[np.ndarray]:
    """Re-minimize the moment-matrix trace over the near-optimal face.

    Interior-point iterates sit near the analytic center of the optimal
    face, which spreads mass across many directions and hides the atomic
    structure.  Capping the objective at the solved value and minimizing
    the trace of the full moment matrix collapses the face to a low-rank
    moment vector, which is what certification and extraction need.
    """
    idx = {a: i for i, a in enumerate(sdp.basis)}
    tr = np.zeros(sdp.num_moments)
    for a in grlex_basis(sdp.nvars, sdp.k):
        tr[idx[tuple(2 * v for v in a)]] += 1.0
    delta = 1e-5 * (1.0 + abs(sol.pobj))
    # Objective cap encoded as a 1x1 PSD block: pobj + delta - <f0, y> >= 0.
    cap: dict[int, list[tuple[int, int, float]]] = {-1: [(0, 0, sol.pobj + delta)]}
    for vi, cv in enumerate(sdp.objective):
        if cv:
            cap.setdefault(vi, []).append((0, 0, -float(cv)))
    prob2 = SdpProblem(
        nvar=sdp.num_moments,
        c=tr,
        eq_A=sdp.eq_A,
        eq_b=sdp.eq_b,
        blocks=sdp.psd_blocks + [("objective-cap", 1, cap)],
    )
    sol2 = solve(prob2, opts)
    # Even a near-converged iterate serves: this phase only reshapes the
    # moment vector for extraction, and every atom is re-validated after.
    if sol2.y is not None and sol2.status in (
        SdpStatus.OPTIMAL,
        SdpStatus.MAX_ITER,
        SdpStatus.NUMERICAL_FAILURE,
    ):
        return sol2.y
    return None


def _gap_rank(M: np.ndarray, floor_tol: float = 1e-10) -> Optional[int]:
    """Rank suggested by the largest relative gap in the singular values."""
    s = np.linalg.svd(M, compute_uv=False)
    if s.size == 0 or s[0] <= 0.0:
        return None
    cut = floor_tol * s[0]
    best_r, best_ratio = None, 10.0  # require at least one order of magnitude
    for i in range(1, s.size):
        if s[i - 1] <= cut:
            break
        ratio = s[i - 1] / max(s[i], cut)
        if ratio > best_ratio:
            best_r, best_ratio = i, ratio
    return best_r


def _polish_candidate(pop: PolyOptProblem, z0: np.ndarray) -> Optional[np.ndarray]:
    """Locally minimize the preference over the reformulation from an atom.

    Extraction recovers atoms at SDP-solver accuracy; a constrained local
    descent step recovers the remaining digits of the optimal value.
    """
    from scipy.optimize import minimize

    def fun_jac(p: Poly):
        g = p.gradient()
        return (lambda z: p(z)), (lambda z: np.array([gi(z) for gi in g]))

    f, fj = fun_jac(pop.objective)
    eq_grads = [p.gradient() for p in pop.eqs]

    def eq_vals(z):
        return np.array([p(z) for p in pop.eqs])

    def eq_jac_rows(z):
        return np.array([[gi(z) for gi in g] for g in eq_grads])

    cons = []
    if pop.eqs:
        # The equality system is typically overdetermined but rank-deficient
        # near the solution; compress it to independent combinations so the
        # SQP subproblems stay well-posed.
        J0 = eq_jac_rows(z0)
        U, s, _ = np.linalg.svd(J0, full_matrices=False)
        r = max(1, int(np.sum(s >= 1e-8 * max(1.0, s[0]))))
        C = U[:, :r].T
        cons.append(
            {
                "type": "eq",
                "fun": lambda z: C @ eq_vals(z),
                "jac": lambda z: C @ eq_jac_rows(z),
            }
        )
    for p in pop.ineqs:
        pf, pj = fun_jac(p)
        cons.append({"type": "ineq", "fun": pf, "jac": pj})
    try:
        res = minimize(
            f,
            z0,
            jac=fj,
            constraints=cons,
            method="SLSQP",
            options={"maxiter": 200, "ftol": 1e-12},
        )
    except Exception:
        return None
    if res.x is None or not np.all(np.isfinite(res.x)):
        return None
    return np.asarray(res.x, dtype=float)


def choose_representation(
    prob: MopProblem, rep_choice: str = "auto", inverse_degree: int = 2
) -> Representation:
    """Build the requested representation, or pick the smallest workable one.

    `auto` ranks candidates by total variable count (n for x-only, n+m for
    (x, w), n+l for (x, lambda)), tie-broken x-only > (x, w) > (x, lambda),
    and falls back along that order when a construction is unavailable.
    """
    builders = {
        "xonly": lambda: eliminate_all(prob, max_degree=inverse_degree),
        "xw": lambda: lagrange_expr_xw(prob),
        "xlambda": lambda: weight_expr_xlambda(prob),
    }
    if rep_choice in builders:
        return builders[rep_choice]()
    if rep_choice != "auto":
        raise ValueError(f"unknown representation choice {rep_choice!r}")
    n, m, l = prob.n, prob.m, prob.l
    ranked = sorted(
        [("xonly", n, 0), ("xw", n + m, 1), ("xlambda", n + l, 2)],
        key=lambda t: (t[1], t[2]),
    )
    last_err: Exception | None = None
    for name, _, _ in ranked:
        try:
            return builders[name]()
        except (StructureError, LeftInverseNotFound) as exc:
            last_err = exc
    raise StructureError(f"no representation is constructible: {last_err}")


def run_owp(
    prob: MopProblem,
    rep_choice: str = "auto",
    opts: OwpOptions = None,
) -> OwpResult:
    """Increasing-order relaxation loop with certification and extraction.

    Solver infeasibility at any order proves the weakly Pareto set is empty.
    A flat-truncation pass yields minimizers; otherwise the order increases
    until k_max and the best lower bound is reported.
    """
    opts = opts or OwpOptions()
    rep = rep_choice if isinstance(rep_choice, (XW, XLambda, XOnly)) else None
    if rep is None:
        rep = choose_representation(prob, rep_choice, opts.inverse_degree)
    pop = reformulate(prob, rep)
    d0 = pop.d0
    k_start = max(d0, -(-pop.objective.degree() // 2))
    k_max = opts.k_max if opts.k_max is not None else d0 + 3
    k_max = max(k_max, k_start)

    bounds: dict[int, float] = {}
    total_iters = 0
    last_cert = None
    for k in range(k_start, k_max + 1):
        sdp = assemble_sdp(pop, k)
        sol = solve(SdpProblem.from_moment(sdp), opts.sdp)
        total_iters += sol.iterations
        if sol.status is SdpStatus.PRIMAL_INFEASIBLE:
            return OwpResult(
                status=OwpStatus.INFEASIBLE_NO_WPP,
                fmin=None,
                minimizers=[],
                certificate=None,
                order_used=k,
                bounds=bounds,
                representation=rep,
                sdp_iterations=total_iters,
            )
        if sol.status is not SdpStatus.OPTIMAL or sol.y is None:
            continue
        bounds[k] = sol.pobj
        y_flat = _minimal_trace_resolve(sdp, sol, opts.sdp)
        candidates_y = [y_flat] if y_flat is not None else []
        candidates_y.append(sol.y)
        cert = None
        measures = []
        for yv in candidates_y:
            y = Tms(nvars=pop.nvars, k=k, values=yv)
            cert_y = flat_truncation(y, d0, k, opts.rank_tol)
            last_cert = cert_y
            if cert_y.passed:
                try:
                    measures.append(extract_atoms(y, cert_y.t, cert_y.rank_t, d0))
                    if cert is None:
                        cert = cert_y
                    continue
                except ExtractionFailure:
                    pass
            # Solver noise can hide a flat moment vector behind tiny spurious
            # singular values.  Retry at the rank suggested by the largest
            # spectral gap, dropping atoms with negligible mass; acceptance
            # still hinges on the validation and bound-matching checks below.
            rank_cands = {cert_y.rank_t_minus_d0, _gap_rank(y.moment_matrix(k))}
            rank_cands.discard(None)
            rank_cands.discard(0)
            for r in sorted(rank_cands):
                try:
                    cand = extract_atoms(y, k, r, d0)
                except ExtractionFailure:
                    continue
                keep = cand.weights >= 1e-3 * max(1e-300, float(np.max(cand.weights)))
                if not np.any(keep):
                    continue
                measures.append(
                    AtomicMeasure(
                        atoms=[a for a, kp in zip(cand.atoms, keep) if kp],
                        weights=cand.weights[keep] / np.sum(cand.weights[keep]),
                    )
                )
                if cert is None:
                    cert = cert_y
        if not measures:
            continue
        candidates = []
        for atom in (a for mea in measures for a in mea.atoms):
            z = gauss_newton_refine(pop.eqs, atom)
            polished = _polish_candidate(pop, z)
            if polished is not None:
                zp = gauss_newton_refine(pop.eqs, polished)
                eq_p = max((abs(p(zp)) for p in pop.eqs), default=0.0)
                ineq_p = min((p(zp) for p in pop.ineqs), default=0.0)
                if (
                    eq_p <= opts.eq_tol
                    and ineq_p >= -opts.ineq_tol
                    and pop.objective(zp) < pop.objective(z)
                ):
                    z = zp
            eq_res = max((abs(p(z)) for p in pop.eqs), default=0.0)
            ineq_min = min((p(z) for p in pop.ineqs), default=0.0)
            kkt = kkt_residual(prob, rep, z)
            x, w, lam = rep.split(prob, z)
            f0 = prob.preference(x)
            ok = (
                eq_res <= opts.eq_tol
                and ineq_min >= -opts.ineq_tol
                and kkt <= opts.kkt_tol
                and abs(f0 - sol.pobj) <= 1e-3 * (1 + abs(sol.pobj))
            )
            if ok:
                candidates.append(
                    Minimizer(x=x, w=w, lam=lam, f0=f0, kkt=kkt, eq_residual=eq_res)
                )
        if candidates:
            # Refined atoms are exactly feasible, so their value is a sharper
            # estimate of the relaxation optimum than the solver objective
            # when the interior-point solve stops slightly short.
            fmin = min(mz.f0 for mz in candidates)
            bounds[k] = min(bounds[k], fmin)
            minimizers = [
                mz for mz in candidates if abs(mz.f0 - fmin) <= 1e-5 * (1 + abs(fmin))
            ]
            return OwpResult(
                status=OwpStatus.SOLVED,
                fmin=fmin,
                minimizers=minimizers,
                certificate=cert,
                order_used=k,
                bounds=bounds,
                representation=rep,
                sdp_iterations=total_iters,
            )
    best = max(bounds.values()) if bounds else None
    return OwpResult(
        status=OwpStatus.ORDER_LIMIT_REACHED,
        fmin=best,
        minimizers=[],
        certificate=last_cert,
        order_used=max(bounds) if bounds else None,
        bounds=bounds,
        representation=rep,
        sdp_iterations=total_iters,
    )
