"""Moment relaxations of a polynomial optimization problem.

Order-k relaxation: variables are pseudo-moments y indexed by monomials of
degree <= 2k; the moment matrix and one localizing matrix per inequality are
constrained PSD, each equality polynomial contributes scalar linear equations
(its localizing matrix pinned to zero, entrywise), and <1, y> = 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Optional, Sequence

import numpy as np

from .poly import Exponent, Poly, grlex_basis
from .reformulate import PolyOptProblem

# A PSD block is a linear matrix-valued map of y, stored sparsely:
# {y_index: [(i, j, coef), ...]} over the full square matrix.
BlockMap = dict[int, list[tuple[int, int, float]]]


@dataclass
class Tms:
    """Truncated multi-sequence: pseudo-moments up to degree 2k."""

    nvars: int
    k: int
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        want = comb(self.nvars + 2 * self.k, 2 * self.k)
        if self.values.shape != (want,):
            raise ValueError(f"tms length {self.values.shape} != {want}")

    @staticmethod
    def dirac(point: Sequence[float], k: int) -> "Tms":
        """Moments of the Dirac measure at a point."""
        point = np.asarray(point, dtype=float)
        n = point.shape[0]
        basis = grlex_basis(n, 2 * k)
        vals = np.array([np.prod(point**np.asarray(a)) for a in basis])
        return Tms(nvars=n, k=k, values=vals)

    @staticmethod
    def mixture(tms_list: Sequence["Tms"], weights: Sequence[float]) -> "Tms":
        vals = sum(w * t.values for w, t in zip(weights, tms_list))
        t0 = tms_list[0]
        return Tms(nvars=t0.nvars, k=t0.k, values=vals)

    def index(self) -> dict[Exponent, int]:
        return {a: i for i, a in enumerate(grlex_basis(self.nvars, 2 * self.k))}

    def moment_matrix(self, t: int) -> np.ndarray:
        """Numeric moment matrix M_t[y] for t <= k."""
        if t > self.k:
            raise ValueError("truncation order exceeds the tms degree")
        basis = grlex_basis(self.nvars, t)
        idx = self.index()
        s = len(basis)
        M = np.empty((s, s))
        for i, a in enumerate(basis):
            for j in range(i, s):
                v = self.values[idx[tuple(x + y for x, y in zip(a, basis[j]))]]
                M[i, j] = M[j, i] = v
        return M


def moment_matrix(nvars: int, k: int) -> list[list[Exponent]]:
    """Symbolic moment matrix: entry (i, j) is the exponent of the referenced moment."""
    basis = grlex_basis(nvars, k)
    return [[tuple(x + y for x, y in zip(a, b)) for b in basis] for a in basis]


def localizing_matrix(q: Poly, k: int) -> list[list[dict[Exponent, float]]]:
    """Symbolic localizing matrix of q: entry (i, j) maps exponents to coefficients."""
    half = -(-q.degree() // 2)
    if q.degree() > 2 * k:
        raise ValueError(f"deg q = {q.degree()} exceeds 2k = {2 * k}")
    basis = grlex_basis(q.nvars, k - half)
    out = []
    for a in basis:
        row = []
        for b in basis:
            ab = tuple(x + y for x, y in zip(a, b))
            row.append(
                {tuple(g + e for g, e in zip(ab, gamma)): c for gamma, c in q.terms.items()}
            )
        out.append(row)
    return out


@dataclass
class MomentSdp:
    """The order-k moment relaxation in linear-matrix-inequality form."""

    nvars: int
    k: int
    basis: list[Exponent]
    objective: np.ndarray  # c with <f0, y> = c @ y
    eq_A: np.ndarray
    eq_b: np.ndarray
    psd_blocks: list[tuple[str, int, BlockMap]]

    @property
    def num_moments(self) -> int:
        return len(self.basis)

    def block_value(self, label_index: int, y: np.ndarray) -> np.ndarray:
        _, size, bmap = self.psd_blocks[label_index]
        M = np.zeros((size, size))
        for vi, entries in bmap.items():
            for i, j, c in entries:
                M[i, j] += c * y[vi]
        return M


def _normalized_row_key(row: np.ndarray, rhs: float, tol: float = 1e-12) -> Optional[tuple]:
    nz = np.nonzero(np.abs(row) > tol)[0]
    if nz.size == 0:
        return None if abs(rhs) <= tol else ("inconsistent",)
    scale = np.max(np.abs(row))
    v = row / scale
    if v[nz[0]] < 0:
        v = -v
        rhs = -rhs
    digits = int(-np.log10(tol))
    return (
        tuple(nz.tolist()),
        tuple(np.round(v[nz], digits)),
        round(rhs / scale, digits),
    )


def assemble_sdp(pop: PolyOptProblem, k: int) -> MomentSdp:
    if k < pop.d0:
        raise ValueError(f"relaxation order {k} below the floor d0 = {pop.d0}")
    if pop.objective.degree() > 2 * k:
        raise ValueError("objective degree exceeds 2k")
    nv = pop.nvars
    basis2k = grlex_basis(nv, 2 * k)
    idx = {a: i for i, a in enumerate(basis2k)}
    N = len(basis2k)

    c = np.zeros(N)
    for a, coef in pop.objective.terms.items():
        c[idx[a]] += coef

    # PSD blocks: moment matrix first, then one localizing block per inequality.
    blocks: list[tuple[str, int, BlockMap]] = []

    def add_block(label: str, q: Optional[Poly]):
        half = 0 if q is None else -(-q.degree() // 2)
        bas = grlex_basis(nv, k - half)
        size = len(bas)
        bmap: BlockMap = {}
        for i, a in enumerate(bas):
            for j, b in enumerate(bas):
                ab = tuple(x + y for x, y in zip(a, b))
                if q is None:
                    bmap.setdefault(idx[ab], []).append((i, j, 1.0))
                else:
                    for gamma, coef in q.terms.items():
                        tot = tuple(g + e for g, e in zip(ab, gamma))
                        bmap.setdefault(idx[tot], []).append((i, j, coef))
        blocks.append((label, size, bmap))

    add_block("moment", None)
    for t, psi in enumerate(pop.ineqs):
        if psi.degree() > 2 * k:
            raise ValueError("inequality degree exceeds 2k")
        add_block(f"loc[{t}]", psi)

    # Equalities: localizing matrix of each phi pinned to zero.  Its distinct
    # entries are exactly <x^gamma * phi, y> for |gamma| <= 2(k - ceil(deg/2)).
    rows, rhs = [], []
    row0 = np.zeros(N)
    row0[idx[(0,) * nv]] = 1.0
    rows.append(row0)
    rhs.append(1.0)
    for phi in pop.eqs:
        if phi.is_zero():
            continue
        if phi.degree() > 2 * k:
            raise ValueError("equality degree exceeds 2k")
        # The degree-2k truncated ideal admits every shift x^gamma * phi of
        # total degree <= 2k, so the dual side constrains all of them.
        for gamma in grlex_basis(nv, 2 * k - phi.degree()):
            row = np.zeros(N)
            for delta, coef in phi.terms.items():
                row[idx[tuple(g + d for g, d in zip(gamma, delta))]] += coef
            rows.append(row)
            rhs.append(0.0)

    seen = set()
    keep_rows, keep_rhs = [], []
    for row, r in zip(rows, rhs):
        key = _normalized_row_key(row, r)
        if key is None or key in seen:
            continue
        seen.add(key)
        keep_rows.append(row)
        keep_rhs.append(r)

    return MomentSdp(
        nvars=nv,
        k=k,
        basis=basis2k,
        objective=c,
        eq_A=np.array(keep_rows),
        eq_b=np.array(keep_rhs),
        psd_blocks=blocks,
    )


def dirac_feasibility(sdp: MomentSdp, point: Sequence[float]) -> tuple[float, float]:
    """(max equality residual, min block eigenvalue) at the Dirac tms of a point."""
    y = Tms.dirac(point, sdp.k).values
    scale = max(1.0, float(np.max(np.abs(y))))
    eq_res = float(np.max(np.abs(sdp.eq_A @ y - sdp.eq_b))) if len(sdp.eq_b) else 0.0
    min_eig = np.inf
    for bi in range(len(sdp.psd_blocks)):
        M = sdp.block_value(bi, y)
        min_eig = min(min_eig, float(np.linalg.eigvalsh(M)[0]))
    return eq_res / scale, min_eig


def export_text(sdp: MomentSdp) -> str:
    """Sparse text dump: header, objective, equalities, PSD block entry triples."""
    out = [f"moments {sdp.num_moments} nvars {sdp.nvars} order {sdp.k}"]
    out.append("objective")
    for i in np.nonzero(sdp.objective)[0]:
        out.append(f"{i} {sdp.objective[i]:.17g}")
    out.append(f"equalities {sdp.eq_A.shape[0]}")
    for r in range(sdp.eq_A.shape[0]):
        nz = np.nonzero(sdp.eq_A[r])[0]
        ent = " ".join(f"{i}:{sdp.eq_A[r, i]:.17g}" for i in nz)
        out.append(f"{ent} = {sdp.eq_b[r]:.17g}")
    out.append(f"blocks {len(sdp.psd_blocks)}")
    for label, size, bmap in sdp.psd_blocks:
        out.append(f"block {label} {size}")
        for vi in sorted(bmap):
            for i, j, cc in bmap[vi]:
                if i <= j:
                    out.append(f"{vi} {i} {j} {cc:.17g}")
    return "\n".join(out) + "\n"
