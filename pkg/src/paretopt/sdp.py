"""Interior-point solution of the assembled moment SDPs.

The relaxation is posed as  min c^T y  s.t.  A y = b,  S_j(y) >= 0  with each
S_j linear in y, and handed to an interior-point conic solver built on a
homogeneous embedding, so primal infeasibility comes back as a certified
status.  The outer hierarchy relies on that to conclude that no weakly
Pareto point exists.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import clarabel
import numpy as np
from scipy import sparse

from .moment import BlockMap, MomentSdp

_SQRT2 = math.sqrt(2.0)


class SdpStatus(enum.Enum):
    OPTIMAL = "Optimal"
    PRIMAL_INFEASIBLE = "PrimalInfeasible"
    DUAL_INFEASIBLE = "DualInfeasible"
    MAX_ITER = "MaxIter"
    NUMERICAL_FAILURE = "NumericalFailure"


@dataclass
class SdpProblem:
    nvar: int
    c: np.ndarray
    eq_A: np.ndarray
    eq_b: np.ndarray
    # blocks: (label, size, {var_index: [(i, j, coef)]}); var_index -1 holds a
    # constant term of the matrix map.
    blocks: list[tuple[str, int, BlockMap]]

    @staticmethod
    def from_moment(sdp: MomentSdp) -> "SdpProblem":
        return SdpProblem(
            nvar=sdp.num_moments,
            c=sdp.objective,
            eq_A=sdp.eq_A,
            eq_b=sdp.eq_b,
            blocks=sdp.psd_blocks,
        )


@dataclass
class SdpOptions:
    feas_tol: float = 1e-8
    gap_tol: float = 1e-8
    max_iter: int = 200
    verbose: bool = False
    # Interior-point KKT systems carry a dense scaling block per PSD cone
    # (tri(size)^2 doubles); beyond this many svec rows in one block the
    # factorization exceeds desk-scale memory and the problem is routed to a
    # first-order splitting solver instead.
    first_order_tri_threshold: int = 6000


@dataclass
class SdpSolution:
    status: SdpStatus
    y: Optional[np.ndarray]
    pobj: float
    dobj: float
    iterations: int
    gap: float
    duals: Optional[list[np.ndarray]] = None  # PSD dual blocks, matrix form

    def sos_bound(self) -> float:
        """Dual objective value: the certified lower bound."""
        if self.status is not SdpStatus.OPTIMAL:
            raise RuntimeError(f"no bound available in status {self.status.value}")
        return self.dobj


def _reduce_equalities(A: np.ndarray, b: np.ndarray, tol: float = 1e-10):
    """Orthonormal row-reduction of A y = b; None signals an inconsistent system."""
    if A.shape[0] == 0:
        return A, b
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    rank = int(np.sum(s > tol * max(1.0, s[0])))
    coeffs = U[:, :rank].T @ b
    resid = b - U[:, :rank] @ coeffs
    if np.linalg.norm(resid, np.inf) > 1e-9 * max(1.0, np.linalg.norm(b, np.inf)):
        return None, None
    return Vt[:rank], coeffs / s[:rank]


def _svec_index(i: int, j: int) -> int:
    # upper-triangle, column-major: (0,0),(0,1),(1,1),(0,2),(1,2),(2,2),...
    if i > j:
        i, j = j, i
    return j * (j + 1) // 2 + i


def _unsvec(v: np.ndarray, d: int) -> np.ndarray:
    M = np.zeros((d, d))
    for j in range(d):
        for i in range(j + 1):
            val = v[_svec_index(i, j)]
            if i == j:
                M[i, i] = val
            else:
                M[i, j] = M[j, i] = val / _SQRT2
    return M


def _assemble_conic(prob: SdpProblem, Ared, bred, svec_index):
    """Rows of  A_full y + s = b_full,  s in Zero x PSDTriangle^j.

    A PSD block S(y) = F0 + sum y_v F_v >= 0 contributes rows -svec(F_v) and
    right-hand side svec(F0), with svec the scaled triangle packing given by
    `svec_index` (interior-point and splitting backends pack differently).
    """
    n = prob.nvar
    rows_eq = Ared.shape[0]
    tri_sizes = [size * (size + 1) // 2 for _, size, _ in prob.blocks]
    total_rows = rows_eq + sum(tri_sizes)

    data, ridx, cidx = [], [], []
    if rows_eq:
        eq = np.asarray(Ared)
        nz = np.nonzero(eq)
        data.extend(eq[nz])
        ridx.extend(nz[0])
        cidx.extend(nz[1])
    b_full = np.zeros(total_rows)
    b_full[:rows_eq] = bred

    offset = rows_eq
    for (_, size, bmap), tri in zip(prob.blocks, tri_sizes):
        acc: dict[tuple[int, int], float] = {}
        for vi, entries in bmap.items():
            for i, j, coef in entries:
                if i > j:
                    continue
                scale = 1.0 if i == j else _SQRT2
                key = (offset + svec_index(i, j, size), vi)
                acc[key] = acc.get(key, 0.0) + coef * scale
        for (r, vi), val in acc.items():
            if vi < 0:
                b_full[r] += val
            else:
                data.append(-val)
                ridx.append(r)
                cidx.append(vi)
        offset += tri

    A = sparse.csc_matrix(
        (np.asarray(data, dtype=float), (ridx, cidx)), shape=(total_rows, n)
    )
    return A, b_full, tri_sizes


def _svec_upper(i: int, j: int, size: int) -> int:
    return _svec_index(i, j)


def _svec_lower(i: int, j: int, size: int) -> int:
    # lower-triangle, column-major: (0,0),(1,0),...,(d-1,0),(1,1),(2,1),...
    if i < j:
        i, j = j, i
    return j * size - j * (j - 1) // 2 + (i - j)


def _unsvec_lower(v: np.ndarray, d: int) -> np.ndarray:
    M = np.zeros((d, d))
    pos = 0
    for j in range(d):
        for i in range(j, d):
            val = v[pos]
            pos += 1
            if i == j:
                M[i, i] = val
            else:
                M[i, j] = M[j, i] = val / _SQRT2
    return M


def _solve_scs(prob: SdpProblem, opts: SdpOptions, Ared, bred) -> SdpSolution:
    """Operator-splitting fallback for relaxations too large for interior point.

    Per-iteration cost is one cached sparse factorization solve plus one
    eigendecomposition per PSD block, so memory stays proportional to the
    data instead of the squared cone dimension.
    """
    import scs

    rows_eq = Ared.shape[0]
    A, b_full, tri_sizes = _assemble_conic(prob, Ared, bred, _svec_lower)
    cone = {"z": rows_eq, "s": [size for _, size, _ in prob.blocks]}
    # First-order accuracy plateaus around 1e-5 on these relaxations within a
    # reasonable iteration budget; the extraction pipeline re-polishes and
    # re-validates every atom, so tighter tolerances buy nothing here.
    tol = max(opts.gap_tol, 1e-5)
    solver = scs.SCS(
        {"A": A, "b": b_full, "c": np.asarray(prob.c, dtype=float)},
        cone,
        eps_abs=tol,
        eps_rel=tol,
        eps_infeas=1e-9,
        max_iters=150_000,
        time_limit_secs=1200.0,
        verbose=opts.verbose,
    )
    out = solver.solve()
    info = out["info"]
    status = info["status"]
    its = int(info["iter"])
    pobj, dobj = float(info["pobj"]), float(info["dobj"])
    if "solved" in status.lower():
        gap = abs(pobj - dobj) / max(1.0, abs(pobj))
        duals, off = [], rows_eq
        z = np.asarray(out["y"])
        for (_, size, _), tri in zip(prob.blocks, tri_sizes):
            duals.append(_unsvec_lower(z[off : off + tri], size))
            off += tri
        return SdpSolution(
            status=SdpStatus.OPTIMAL,
            y=np.asarray(out["x"]),
            pobj=pobj,
            dobj=dobj,
            iterations=its,
            gap=gap,
            duals=duals,
        )
    if "infeasible" in status.lower():
        return SdpSolution(
            status=SdpStatus.PRIMAL_INFEASIBLE,
            y=None,
            pobj=np.nan,
            dobj=np.nan,
            iterations=its,
            gap=np.nan,
        )
    if "unbounded" in status.lower():
        return SdpSolution(
            status=SdpStatus.DUAL_INFEASIBLE,
            y=np.asarray(out["x"]) if out["x"] is not None else None,
            pobj=pobj,
            dobj=np.nan,
            iterations=its,
            gap=np.nan,
        )
    return SdpSolution(
        status=SdpStatus.MAX_ITER,
        y=np.asarray(out["x"]) if out["x"] is not None else None,
        pobj=pobj,
        dobj=np.nan,
        iterations=its,
        gap=np.nan,
    )


def solve(prob: SdpProblem, opts: SdpOptions = SdpOptions()) -> SdpSolution:
    n = prob.nvar
    Ared, bred = _reduce_equalities(prob.eq_A, prob.eq_b)
    if Ared is None:
        return SdpSolution(
            status=SdpStatus.PRIMAL_INFEASIBLE,
            y=None,
            pobj=np.nan,
            dobj=np.nan,
            iterations=0,
            gap=np.nan,
        )
    if prob.blocks and max(
        size * (size + 1) // 2 for _, size, _ in prob.blocks
    ) > opts.first_order_tri_threshold:
        return _solve_scs(prob, opts, Ared, bred)

    rows_eq = Ared.shape[0]
    A, b_full, tri_sizes = _assemble_conic(prob, Ared, bred, _svec_upper)
    P = sparse.csc_matrix((n, n))
    cones = [clarabel.ZeroConeT(rows_eq)]
    cones += [clarabel.PSDTriangleConeT(size) for _, size, _ in prob.blocks]

    # Retry ladder: the default settings occasionally abort on the very first
    # step when equilibration produces a degenerate KKT system; turning the
    # scaling off or strengthening the static regularization recovers those
    # instances deterministically.
    variants = [{}, {"equilibrate_enable": False}, {"static_regularization_constant": 1e-7}]
    sol = None
    for variant in variants:
        settings = clarabel.DefaultSettings()
        settings.verbose = opts.verbose
        settings.max_iter = opts.max_iter
        settings.tol_gap_abs = opts.gap_tol
        settings.tol_gap_rel = opts.gap_tol
        settings.tol_feas = opts.feas_tol
        for key, val in variant.items():
            setattr(settings, key, val)
        try:
            solver = clarabel.DefaultSolver(
                P, np.asarray(prob.c, dtype=float), A, b_full, cones, settings
            )
            sol = solver.solve()
        except BaseException:
            sol = None
            continue
        if "NumericalError" not in str(sol.status) and "InsufficientProgress" not in str(
            sol.status
        ):
            break
    if sol is None:
        return SdpSolution(
            status=SdpStatus.NUMERICAL_FAILURE,
            y=None,
            pobj=np.nan,
            dobj=np.nan,
            iterations=0,
            gap=np.nan,
        )

    status_name = str(sol.status)
    y = np.asarray(sol.x) if sol.x is not None else None
    pobj = float(sol.obj_val) if sol.obj_val is not None else np.nan
    dobj = float(getattr(sol, "obj_val_dual", np.nan))
    its = int(sol.iterations)
    gap = abs(pobj - dobj) / max(1.0, abs(pobj)) if np.isfinite(dobj) else np.nan

    def psd_duals():
        if sol.z is None:
            return None
        z = np.asarray(sol.z)
        out, off = [], rows_eq
        for (_, size, _), tri in zip(prob.blocks, tri_sizes):
            out.append(_unsvec(z[off : off + tri], size))
            off += tri
        return out

    if "Solved" in status_name and "Almost" not in status_name:
        return SdpSolution(
            status=SdpStatus.OPTIMAL,
            y=y,
            pobj=pobj,
            dobj=dobj,
            iterations=its,
            gap=gap,
            duals=psd_duals(),
        )
    if "PrimalInfeasible" in status_name:
        return SdpSolution(
            status=SdpStatus.PRIMAL_INFEASIBLE,
            y=None,
            pobj=np.nan,
            dobj=np.nan,
            iterations=its,
            gap=np.nan,
        )
    if "DualInfeasible" in status_name:
        return SdpSolution(
            status=SdpStatus.DUAL_INFEASIBLE,
            y=y,
            pobj=pobj,
            dobj=np.nan,
            iterations=its,
            gap=np.nan,
        )
    # AlmostSolved or early termination: accept a near-converged iterate.
    if np.isfinite(gap) and gap <= 1e4 * opts.gap_tol and "Almost" in status_name:
        return SdpSolution(
            status=SdpStatus.OPTIMAL,
            y=y,
            pobj=pobj,
            dobj=dobj,
            iterations=its,
            gap=gap,
            duals=psd_duals(),
        )
    failed = (
        SdpStatus.MAX_ITER
        if "MaxIter" in status_name or "MaxTime" in status_name
        else SdpStatus.NUMERICAL_FAILURE
    )
    return SdpSolution(
        status=failed, y=y, pobj=pobj, dobj=np.nan, iterations=its, gap=gap
    )


def sos_bound(sol: SdpSolution) -> float:
    return sol.sos_bound()
