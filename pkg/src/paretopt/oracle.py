"""Derivative-based sampling of the weakly Pareto set.

For a convex problem, every minimizer of a linear scalarization
f_w = sum_j w_j f_j with w on the simplex is a weakly Pareto point, and
conversely.  Minimizing f_w over a grid of weights therefore yields witness
points and upper bounds that are independent of the moment machinery.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from math import comb
from typing import Iterator, Optional, Sequence

import numpy as np
from scipy.optimize import minimize as scipy_minimize

from .poly import Poly
from .representation import (
    Ball,
    Box,
    Free,
    MopProblem,
    NonnegOrthant,
    cprime1_rows,
)


class DidNotConverge(RuntimeError):
    pass


@dataclass
class WeightGrid:
    m: int
    N: int

    def __iter__(self) -> Iterator[np.ndarray]:
        def comps(total: int, parts: int):
            if parts == 1:
                yield (total,)
                return
            for first in range(total, -1, -1):
                for rest in comps(total - first, parts - 1):
                    yield (first,) + rest

        for c in comps(self.N, self.m):
            yield np.asarray(c, dtype=float) / self.N

    def __len__(self) -> int:
        return comb(self.N + self.m - 1, self.m - 1)


@dataclass
class OracleSample:
    w: np.ndarray
    x: np.ndarray
    lam: np.ndarray
    f0: float
    kkt: float


@dataclass
class OracleReport:
    samples: list[OracleSample]
    skipped: int

    @property
    def upper_bound(self) -> float:
        return min((s.f0 for s in self.samples), default=np.inf)

    @property
    def best(self) -> Optional[OracleSample]:
        return min(self.samples, key=lambda s: s.f0, default=None)

    def to_csv(self) -> str:
        buf = io.StringIO()
        wcsv = csv.writer(buf)
        if not self.samples:
            return ""
        m, n = len(self.samples[0].w), len(self.samples[0].x)
        wcsv.writerow([f"w{j + 1}" for j in range(m)] + [f"x{i + 1}" for i in range(n)] + ["f0", "kkt"])
        for s in self.samples:
            wcsv.writerow([*s.w, *s.x, s.f0, s.kkt])
        return buf.getvalue()


def _projection(prob: MopProblem):
    st = prob.structure
    if isinstance(st, Free):
        return lambda x: x
    if isinstance(st, Box):
        a = np.asarray(st.a, dtype=float)
        return lambda x: np.clip(x, -a, a)
    if isinstance(st, Ball):
        return lambda x: x / max(1.0, float(np.linalg.norm(x)))
    if isinstance(st, NonnegOrthant):
        return lambda x: np.maximum(x, 0.0)
    return None


def _grad_fn(polys: Sequence[Poly], n: int):
    grads = [[p.diff(i) for i in range(n)] for p in polys]

    def g(x, weights):
        out = np.zeros(n)
        for wj, grow in zip(weights, grads):
            if wj:
                out += wj * np.array([gg(x) for gg in grow])
        return out

    return g


def _projected_gradient(prob: MopProblem, w, proj, tol=1e-7, max_iter=10_000):
    n = prob.n
    fw = Poly(n)
    for wj, f in zip(w, prob.objectives):
        fw = fw + f * float(wj)
    grad = [fw.diff(i) for i in range(n)]

    def val(x):
        return fw(x)

    def gval(x):
        return np.array([g(x) for g in grad])

    x = proj(np.zeros(n))
    t = 1.0
    for _ in range(max_iter):
        g = gval(x)
        if np.linalg.norm(x - proj(x - g), np.inf) <= tol:
            return x
        fx = val(x)
        while t > 1e-16:
            cand = proj(x - t * g)
            if val(cand) <= fx + 1e-4 * g @ (cand - x):
                break
            t *= 0.5
        else:
            raise DidNotConverge("line search collapsed")
        x = cand
        t = min(t * 2.0, 1e6)
    if np.linalg.norm(x - proj(x - gval(x)), np.inf) <= 10 * tol:
        return x
    raise DidNotConverge("projected gradient hit the iteration cap")


def _kkt_polish(prob: MopProblem, fw_grad, x, active, steps=8):
    """Damped Gauss-Newton on the active-set KKT system in (x, lambda_active)."""
    n = prob.n
    acts = list(active)
    cg = [[prob.constraints[i].diff(r) for r in range(n)] for i in acts]

    def residual(z):
        x_, lam_ = z[:n], z[n:]
        r = fw_grad(x_)
        for li, grow in zip(lam_, cg):
            r = r - li * np.array([g(x_) for g in grow])
        cvals = [prob.constraints[i](x_) for i in acts]
        return np.concatenate([r, cvals])

    z = np.concatenate([x, np.zeros(len(acts))])
    # initialize multipliers by least squares on stationarity
    if acts:
        Gm = np.array([[g(x) for g in grow] for grow in cg])
        lam0, *_ = np.linalg.lstsq(Gm.T, fw_grad(x), rcond=None)
        z[n:] = lam0
    for _ in range(steps):
        r = residual(z)
        nrm = np.linalg.norm(r)
        if nrm <= 1e-13:
            break
        J = _numeric_jacobian(residual, z)
        step, *_ = np.linalg.lstsq(J, -r, rcond=1e-10)
        scale = 1.0
        for _ in range(20):
            cand = z + scale * step
            if np.linalg.norm(residual(cand)) <= nrm:
                z = cand
                break
            scale *= 0.5
        else:
            break
    return z[:n], z[n:]


def _numeric_jacobian(fn, z, h=1e-7):
    base = fn(z)
    J = np.empty((base.size, z.size))
    for i in range(z.size):
        zp = z.copy()
        zp[i] += h
        J[:, i] = (fn(zp) - base) / h
    return J


def solve_lsp(
    prob: MopProblem, w: Sequence[float], tol: float = 1e-7, max_iter: int = 10_000
) -> np.ndarray:
    """Minimize the scalarization f_w over the feasible set.

    Structures with closed-form projections use projected gradient descent
    with an Armijo line search; general constraint sets go through SLSQP with
    an active-set Gauss-Newton polish to reach tight stationarity.
    """
    w = np.asarray(w, dtype=float)
    if w.shape != (prob.m,) or np.any(w < -1e-12) or abs(w.sum() - 1.0) > 1e-9:
        raise ValueError("w must lie on the probability simplex")
    proj = _projection(prob)
    if proj is not None:
        return _projected_gradient(prob, w, proj, tol, max_iter)

    n = prob.n
    fw = Poly(n)
    for wj, f in zip(w, prob.objectives):
        fw = fw + f * float(wj)
    grad = [fw.diff(i) for i in range(n)]

    def fun(x):
        return fw(x)

    def jac(x):
        return np.array([g(x) for g in grad])

    cons = [
        {
            "type": "ineq",
            "fun": (lambda x, c=c: c(x)),
            "jac": (lambda x, c=c: np.array([c.diff(r)(x) for r in range(n)])),
        }
        for c in prob.constraints
    ]
    res = scipy_minimize(
        fun,
        np.zeros(n),
        jac=jac,
        method="SLSQP",
        constraints=cons,
        options={"maxiter": min(max_iter, 1000), "ftol": 1e-12},
    )
    if not res.success and res.status != 8:
        raise DidNotConverge(f"SLSQP: {res.message}")
    x = res.x
    active = [i for i, c in enumerate(prob.constraints) if c(x) <= 1e-5]
    x, lam = _kkt_polish(prob, jac, x, active)
    cvals = np.array([c(x) for c in prob.constraints]) if prob.l else np.array([])
    if prob.l and np.min(cvals) < -1e-7:
        raise DidNotConverge("polished point left the feasible set")
    # stationarity residual with the polished multipliers
    r = jac(x)
    for li, i in zip(lam, active):
        r = r - li * np.array([prob.constraints[i].diff(rr)(x) for rr in range(n)])
    if np.linalg.norm(r, np.inf) > 1e-6 or (len(lam) and np.min(lam) < -1e-6):
        raise DidNotConverge("stationarity residual too large after polish")
    return x


def recover_multipliers(prob: MopProblem, w: Sequence[float], x: np.ndarray) -> np.ndarray:
    """lambda_i = ell_i(x)^T grad f_w(x) via the structure's one-sided inverse."""
    if prob.l == 0:
        return np.array([])
    n = prob.n
    g = np.zeros(n)
    for wj, f in zip(w, prob.objectives):
        g += wj * np.array([f.diff(r)(x) for r in range(n)])
    rows = cprime1_rows(prob)
    return np.array([sum(p(x) * gr for p, gr in zip(row, g)) for row in rows])


def sample_wp(prob: MopProblem, N: int, tol: float = 1e-7) -> OracleReport:
    """One scalarization solve per grid weight; non-converged weights are skipped."""
    from .representation import kkt_residual, lagrange_expr_xw, XOnly

    samples, skipped = [], 0
    for w in WeightGrid(prob.m, N):
        try:
            x = solve_lsp(prob, w, tol=tol)
        except DidNotConverge:
            skipped += 1
            continue
        lam = recover_multipliers(prob, w, x)
        kkt = _sample_kkt(prob, x, w, lam)
        samples.append(
            OracleSample(w=w, x=x, lam=lam, f0=prob.preference(x), kkt=kkt)
        )
    return OracleReport(samples=samples, skipped=skipped)


def _sample_kkt(prob, x, w, lam) -> float:
    n = prob.n
    stat = np.zeros(n)
    for wj, f in zip(w, prob.objectives):
        stat += wj * np.array([f.diff(r)(x) for r in range(n)])
    for li, c in zip(lam, prob.constraints):
        stat -= li * np.array([c.diff(r)(x) for r in range(n)])
    res = float(np.max(np.abs(stat))) if n else 0.0
    cvals = np.array([c(x) for c in prob.constraints]) if prob.l else np.array([])
    if prob.l:
        res = max(res, float(np.max(np.abs(lam * cvals))))
        res = max(res, float(np.max(np.maximum(0.0, -lam))))
        res = max(res, float(np.max(np.maximum(0.0, -cvals))))
    res = max(res, abs(float(np.sum(w)) - 1.0))
    return res
