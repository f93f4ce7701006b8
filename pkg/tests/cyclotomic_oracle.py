"""Exact arithmetic in Q(zeta_N), just enough for monomial-representation
checks in the tests: elements are polynomials in zeta modulo the N-th
cyclotomic polynomial with Fraction coefficients.

This is a test-only oracle, deliberately independent of the package code.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Sequence, Tuple


def _poly_trim(p: List[Fraction]) -> List[Fraction]:
    while p and p[-1] == 0:
        p.pop()
    return p


def _poly_mul(a: Sequence[Fraction], b: Sequence[Fraction]) -> List[Fraction]:
    out = [Fraction(0)] * (len(a) + len(b) - 1 if a and b else 0)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    out[i + j] += x * y
    return _poly_trim(out)


def _poly_divmod(a: Sequence[Fraction], b: Sequence[Fraction]) -> Tuple[List[Fraction], List[Fraction]]:
    a = list(a)
    q = [Fraction(0)] * max(0, len(a) - len(b) + 1)
    while len(a) >= len(b) and _poly_trim(list(a)):
        a = _poly_trim(a)
        if len(a) < len(b):
            break
        c = a[-1] / b[-1]
        d = len(a) - len(b)
        q[d] = c
        for i, y in enumerate(b):
            a[i + d] -= c * y
        a = _poly_trim(a)
    return _poly_trim(q), _poly_trim(list(a))


_PHI_CACHE: Dict[int, List[Fraction]] = {}


def cyclotomic_poly(n: int) -> List[Fraction]:
    if n in _PHI_CACHE:
        return _PHI_CACHE[n]
    # x^n - 1 divided by the product of Phi_d over proper divisors d
    num = [Fraction(-1)] + [Fraction(0)] * (n - 1) + [Fraction(1)]
    den = [Fraction(1)]
    for d in range(1, n):
        if n % d == 0:
            den = _poly_mul(den, cyclotomic_poly(d))
    q, r = _poly_divmod(num, den)
    assert not r
    _PHI_CACHE[n] = q
    return q


class Cyc:
    """An element of Q(zeta_N)."""

    __slots__ = ("n", "coeffs")

    def __init__(self, n: int, coeffs: Sequence[Fraction]):
        self.n = n
        phi = cyclotomic_poly(n)
        c = list(coeffs)
        _, rem = _poly_divmod(c, phi)
        rem = rem + [Fraction(0)] * (len(phi) - 1 - len(rem))
        self.coeffs = tuple(rem)

    @staticmethod
    def zero(n: int) -> "Cyc":
        return Cyc(n, [])

    @staticmethod
    def one(n: int) -> "Cyc":
        return Cyc(n, [Fraction(1)])

    @staticmethod
    def root_of_unity(n: int, value: Fraction) -> "Cyc":
        """zeta_N ** (value * N) for value in Q/Z with denominator dividing N."""
        k = value * n
        assert k.denominator == 1
        e = int(k) % n
        coeffs = [Fraction(0)] * e + [Fraction(1)]
        return Cyc(n, coeffs)

    def __add__(self, other: "Cyc") -> "Cyc":
        a, b = list(self.coeffs), list(other.coeffs)
        m = max(len(a), len(b))
        a += [Fraction(0)] * (m - len(a))
        b += [Fraction(0)] * (m - len(b))
        return Cyc(self.n, [x + y for x, y in zip(a, b)])

    def __sub__(self, other: "Cyc") -> "Cyc":
        return self + other.scale(Fraction(-1))

    def __mul__(self, other: "Cyc") -> "Cyc":
        return Cyc(self.n, _poly_mul(list(self.coeffs), list(other.coeffs)))

    def scale(self, c: Fraction) -> "Cyc":
        return Cyc(self.n, [c * x for x in self.coeffs])

    def is_zero(self) -> bool:
        return all(x == 0 for x in self.coeffs)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Cyc) and self.n == other.n and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.n, self.coeffs))

    def inverse(self) -> "Cyc":
        # extended Euclid in Q[x] against the cyclotomic modulus
        phi = cyclotomic_poly(self.n)
        r0, r1 = phi, _poly_trim(list(self.coeffs))
        assert r1, "division by zero"
        s0, s1 = [Fraction(0)], [Fraction(1)]
        t0 = [Fraction(1)]
        while True:
            q, r = _poly_divmod(r0, r1)
            if not r:
                break
            s_new = _poly_trim([x - y for x, y in
                                zip(s0 + [Fraction(0)] * max(0, len(_poly_mul(q, s1)) - len(s0)),
                                    _poly_mul(q, s1) + [Fraction(0)] * max(0, len(s0) - len(_poly_mul(q, s1))))])
            r0, r1 = r1, r
            s0, s1 = s1, s_new
        # r1 is the gcd, a nonzero constant (phi is irreducible over Q)
        assert len(r1) == 1
        inv = [x / r1[0] for x in s1]
        return Cyc(self.n, inv)

    def conjugate(self) -> "Cyc":
        """Complex conjugation: zeta -> zeta^-1."""
        out = Cyc.zero(self.n)
        for e, c in enumerate(self.coeffs):
            if c:
                out = out + Cyc.root_of_unity(self.n, Fraction(-e, self.n)).scale(c)
        return out

    def __repr__(self):
        return "Cyc(%d, %s)" % (self.n, list(self.coeffs))


def mat_mul_cyc(a: List[List[Cyc]], b: List[List[Cyc]]) -> List[List[Cyc]]:
    n = len(a)
    m = len(b[0])
    k = len(b)
    out = [[Cyc.zero(a[0][0].n) for _ in range(m)] for _ in range(n)]
    for i in range(n):
        for j in range(m):
            acc = Cyc.zero(a[0][0].n)
            for t in range(k):
                acc = acc + a[i][t] * b[t][j]
            out[i][j] = acc
    return out


def column_space_basis(mat: List[List[Cyc]]) -> List[List[Cyc]]:
    """Basis of the column space by exact Gaussian elimination; columns
    returned as vectors."""
    if not mat:
        return []
    n = len(mat)
    cols = [[mat[i][j] for i in range(n)] for j in range(len(mat[0]))]
    basis: List[List[Cyc]] = []
    pivots: List[int] = []
    for col in cols:
        work = list(col)
        for b, piv in zip(basis, pivots):
            factor = work[piv] * b[piv].inverse()
            if not factor.is_zero():
                work = [w - factor * x for w, x in zip(work, b)]
        piv = next((i for i, x in enumerate(work) if not x.is_zero()), None)
        if piv is not None:
            basis.append(work)
            pivots.append(piv)
    return basis


def solve_in_basis(basis: List[List[Cyc]], target: List[Cyc]) -> List[Cyc]:
    """Coordinates of target in the span of the basis vectors (must exist)."""
    n = len(target)
    ncols = len(basis)
    # Gaussian elimination on the augmented system
    rows = [[basis[j][i] for j in range(ncols)] + [target[i]] for i in range(n)]
    coords: List[Cyc] = [Cyc.zero(target[0].n) for _ in range(ncols)]
    r = 0
    pivot_cols: List[int] = []
    for c in range(ncols):
        piv = next((i for i in range(r, n) if not rows[i][c].is_zero()), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = rows[r][c].inverse()
        rows[r] = [x * inv for x in rows[r]]
        for i in range(n):
            if i != r and not rows[i][c].is_zero():
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivot_cols.append(c)
        r += 1
    for i in range(r, n):
        assert rows[i][ncols].is_zero(), "target outside the span"
    for i, c in enumerate(pivot_cols):
        coords[c] = rows[i][ncols]
    return coords
