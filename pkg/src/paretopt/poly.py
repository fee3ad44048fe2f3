"""Sparse multivariate polynomials keyed by exponent tuples, graded-lex ordering."""

from __future__ import annotations

from math import comb
from typing import Iterable, Iterator, Sequence

import numpy as np

Exponent = tuple[int, ...]


def grlex_key(alpha: Exponent):
    """Sort key: total degree first, then lexicographic with x1 > x2 > ..."""
    return (sum(alpha), tuple(-a for a in alpha))


def _monomials_of_degree(n: int, deg: int) -> Iterator[Exponent]:
    if n == 1:
        yield (deg,)
        return
    for first in range(deg, -1, -1):
        for rest in _monomials_of_degree(n - 1, deg - first):
            yield (first,) + rest


def grlex_basis(n: int, d: int) -> list[Exponent]:
    """All exponents alpha with |alpha| <= d in graded lexicographic order."""
    if n < 1:
        raise ValueError("need at least one variable")
    if d < 0:
        raise ValueError("degree must be nonnegative")
    out: list[Exponent] = []
    for deg in range(d + 1):
        out.extend(_monomials_of_degree(n, deg))
    assert len(out) == comb(n + d, d)
    return out


class Poly:
    """Immutable-by-convention sparse polynomial with float coefficients.

    Zero coefficients are never stored.  Numeric pruning of small coefficients
    only happens through an explicit clean() call.
    """

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms=None):
        self.nvars = int(nvars)
        tm: dict[Exponent, float] = {}
        if terms:
            items = terms.items() if isinstance(terms, dict) else terms
            for a, c in items:
                a = tuple(int(e) for e in a)
                if len(a) != self.nvars:
                    raise ValueError(f"exponent {a} has wrong length for nvars={self.nvars}")
                if any(e < 0 for e in a):
                    raise ValueError(f"negative exponent in {a}")
                c = tm.get(a, 0.0) + float(c)
                if c == 0.0:
                    tm.pop(a, None)
                else:
                    tm[a] = c
        self.terms = tm

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero(nvars: int) -> "Poly":
        return Poly(nvars)

    @staticmethod
    def const(nvars: int, c: float) -> "Poly":
        return Poly(nvars, {(0,) * nvars: c})

    @staticmethod
    def var(i: int, nvars: int) -> "Poly":
        if not 0 <= i < nvars:
            raise IndexError(f"variable index {i} out of range for nvars={nvars}")
        e = [0] * nvars
        e[i] = 1
        return Poly(nvars, {tuple(e): 1.0})

    @staticmethod
    def linear(coeffs: Sequence[float], const: float = 0.0) -> "Poly":
        n = len(coeffs)
        p = Poly.const(n, const)
        for i, c in enumerate(coeffs):
            if c:
                p = p + c * Poly.var(i, n)
        return p

    # -- basic queries -----------------------------------------------------

    def degree(self) -> int:
        """Total degree; the zero polynomial has degree 0."""
        if not self.terms:
            return 0
        return max(sum(a) for a in self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def coeff(self, alpha: Sequence[int]) -> float:
        return self.terms.get(tuple(alpha), 0.0)

    def max_abs_coeff(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def constant(self) -> float:
        return self.terms.get((0,) * self.nvars, 0.0)

    def items_grlex(self) -> list[tuple[Exponent, float]]:
        return sorted(self.terms.items(), key=lambda kv: grlex_key(kv[0]))

    # -- arithmetic --------------------------------------------------------

    def _check(self, other: "Poly"):
        if self.nvars != other.nvars:
            raise ValueError(f"variable count mismatch: {self.nvars} vs {other.nvars}")

    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = Poly.const(self.nvars, other)
        self._check(other)
        tm = dict(self.terms)
        for a, c in other.terms.items():
            s = tm.get(a, 0.0) + c
            if s == 0.0:
                tm.pop(a, None)
            else:
                tm[a] = s
        out = Poly(self.nvars)
        out.terms = tm
        return out

    __radd__ = __add__

    def __neg__(self):
        out = Poly(self.nvars)
        out.terms = {a: -c for a, c in self.terms.items()}
        return out

    def __sub__(self, other):
        if isinstance(other, (int, float)):
            other = Poly.const(self.nvars, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            if other == 0:
                return Poly(self.nvars)
            out = Poly(self.nvars)
            out.terms = {a: c * other for a, c in self.terms.items()}
            return out
        self._check(other)
        tm: dict[Exponent, float] = {}
        for a, ca in self.terms.items():
            for b, cb in other.terms.items():
                ab = tuple(x + y for x, y in zip(a, b))
                s = tm.get(ab, 0.0) + ca * cb
                if s == 0.0:
                    tm.pop(ab, None)
                else:
                    tm[ab] = s
        out = Poly(self.nvars)
        out.terms = tm
        return out

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        out = Poly.const(self.nvars, 1.0)
        base = self
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out

    def diff(self, k: int) -> "Poly":
        """Formal partial derivative with respect to variable k (0-based)."""
        if not 0 <= k < self.nvars:
            raise IndexError(f"variable index {k} out of range")
        tm: dict[Exponent, float] = {}
        for a, c in self.terms.items():
            if a[k] == 0:
                continue
            b = list(a)
            b[k] -= 1
            tm[tuple(b)] = c * a[k]
        out = Poly(self.nvars)
        out.terms = tm
        return out

    def gradient(self) -> list["Poly"]:
        return [self.diff(k) for k in range(self.nvars)]

    def __call__(self, point: Sequence[float]) -> float:
        point = np.asarray(point, dtype=float)
        if point.shape != (self.nvars,):
            raise ValueError(f"point length {point.shape} != nvars {self.nvars}")
        total = 0.0
        for a, c in self.terms.items():
            v = c
            for i, e in enumerate(a):
                if e:
                    v *= point[i] ** e
            total += v
        return total

    def eval_many(self, points: np.ndarray) -> np.ndarray:
        """Evaluate at each row of an (N, nvars) array."""
        points = np.asarray(points, dtype=float)
        out = np.zeros(points.shape[0])
        for a, c in self.terms.items():
            out += c * np.prod(points ** np.asarray(a), axis=1)
        return out

    # -- substitution ------------------------------------------------------

    def subs(self, images: Sequence["Poly"]) -> "Poly":
        """Substitute images[i] for variable i; images share a common nvars."""
        if len(images) != self.nvars:
            raise ValueError("need one image polynomial per variable")
        nv = images[0].nvars
        out = Poly(nv)
        pow_cache: dict[tuple[int, int], Poly] = {}

        def power(i: int, e: int) -> Poly:
            key = (i, e)
            if key not in pow_cache:
                pow_cache[key] = images[i] ** e
            return pow_cache[key]

        for a, c in self.terms.items():
            term = Poly.const(nv, c)
            for i, e in enumerate(a):
                if e:
                    term = term * power(i, e)
            out = out + term
        return out

    def lift(self, new_nvars: int, offset: int = 0) -> "Poly":
        """Embed into a larger variable space, old variable i -> offset+i."""
        if offset + self.nvars > new_nvars:
            raise ValueError("lift target too small")
        pre = (0,) * offset
        post_len = new_nvars - offset - self.nvars
        post = (0,) * post_len
        out = Poly(new_nvars)
        out.terms = {pre + a + post: c for a, c in self.terms.items()}
        return out

    def clean(self, rel_tol: float = 1e-12) -> "Poly":
        """Drop coefficients below rel_tol relative to the largest one."""
        cut = rel_tol * self.max_abs_coeff()
        out = Poly(self.nvars)
        out.terms = {a: c for a, c in self.terms.items() if abs(c) > cut}
        return out

    # -- misc --------------------------------------------------------------

    def norm_inf_diff(self, other: "Poly") -> float:
        return (self - other).max_abs_coeff()

    def __eq__(self, other):
        return isinstance(other, Poly) and self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for a, c in self.items_grlex():
            mono = "*".join(
                f"x{i + 1}" + (f"^{e}" if e > 1 else "") for i, e in enumerate(a) if e
            )
            if mono:
                parts.append(f"{c:+g}*{mono}")
            else:
                parts.append(f"{c:+g}")
        return " ".join(parts)


def compose_affine(p: Poly, a: Poly) -> Poly:
    """Substitute the polynomial a for the single variable of p."""
    if p.nvars != 1:
        raise ValueError("compose_affine expects a univariate outer polynomial")
    return p.subs([a])


# ---------------------------------------------------------------------------
# Polynomial matrices are plain nested lists of Poly sharing one nvars.

PolyMatrix = list  # list[list[Poly]]


def pm_shape(A: PolyMatrix) -> tuple[int, int]:
    return (len(A), len(A[0]) if A else 0)


def pm_mul(A: PolyMatrix, B: PolyMatrix) -> PolyMatrix:
    ra, ca = pm_shape(A)
    rb, cb = pm_shape(B)
    if ca != rb:
        raise ValueError(f"matrix shape mismatch: {ca} vs {rb}")
    nv = A[0][0].nvars
    out = []
    for i in range(ra):
        row = []
        for j in range(cb):
            s = Poly(nv)
            for k in range(ca):
                s = s + A[i][k] * B[k][j]
            row.append(s)
        out.append(row)
    return out


def pm_identity_error(A: PolyMatrix) -> float:
    """Max coefficient-wise deviation of a square PolyMatrix from the identity."""
    r, c = pm_shape(A)
    if r != c:
        raise ValueError("not square")
    nv = A[0][0].nvars
    err = 0.0
    for i in range(r):
        for j in range(c):
            target = Poly.const(nv, 1.0) if i == j else Poly(nv)
            err = max(err, A[i][j].norm_inf_diff(target))
    return err


def pm_from_array(M: np.ndarray, nvars: int) -> PolyMatrix:
    """Constant PolyMatrix from a numeric array."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    return [[Poly.const(nvars, M[i, j]) for j in range(M.shape[1])] for i in range(M.shape[0])]
