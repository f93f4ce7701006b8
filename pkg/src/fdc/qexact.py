"""Exact arithmetic for values of the form c * p^e.

Every degree and gamma computation in this package produces a value of this
shape: a rational p-unit c times a (possibly fractional) power of the
residue characteristic p.  Canonicalizing over p rather than over q = p^a
keeps structural equality decidable: q^(1/2) is an honest rational when a
is even (9^(1/2) = 3), so a q-based normal form would not be unique.

All values are immutable; arithmetic never leaves the exact world.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Tuple, Union

RationalLike = Union[int, Fraction]


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


@dataclass(frozen=True)
class PrimePower:
    """An odd prime power q = p**a (the residue field size)."""

    p: int
    a: int

    def __post_init__(self) -> None:
        if not _is_prime(self.p):
            raise ValueError("p = %r is not prime" % (self.p,))
        if self.p == 2:
            raise ValueError("p must be odd")
        if self.a < 1:
            raise ValueError("exponent a = %r must be a positive integer" % (self.a,))

    @property
    def q(self) -> int:
        return self.p ** self.a

    @staticmethod
    def from_q(q: int) -> "PrimePower":
        """Factor an integer known to be a prime power into (p, a)."""
        if q < 3:
            raise ValueError("q = %r is not an odd prime power" % (q,))
        for p in range(3, q + 1, 2):
            if not _is_prime(p):
                continue
            if q % p:
                continue
            a = 0
            m = q
            while m % p == 0:
                m //= p
                a += 1
            if m != 1:
                raise ValueError("q = %r is not a prime power" % (q,))
            return PrimePower(p, a)
        raise ValueError("q = %r is not an odd prime power" % (q,))

    def __str__(self) -> str:
        return "%d" % self.q if self.a == 1 else "%d^%d" % (self.p, self.a)


def padic_split(n: int, p: int) -> Tuple[int, int]:
    """Write n = u * p**k with p not dividing u; returns (u, k).  n != 0."""
    if n == 0:
        raise ValueError("0 has no p-adic decomposition")
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    return n, k


@dataclass(frozen=True)
class QMonomial:
    """Canonical value coeff * p**pexp with coeff a nonzero p-unit rational.

    Instances must be built through :func:`qmon` (or the module operations),
    which extract the p-part of the coefficient into the exponent.  With that
    normal form, dataclass equality is value equality.
    """

    pp: PrimePower
    coeff: Fraction
    pexp: Fraction

    def __post_init__(self) -> None:
        if self.coeff == 0:
            raise ValueError("zero is not a q-monomial")
        p = self.pp.p
        if self.coeff.numerator % p == 0 or self.coeff.denominator % p == 0:
            raise ValueError("coefficient %s is not a %d-unit" % (self.coeff, p))

    # -- arithmetic ---------------------------------------------------------

    def __mul__(self, other: "QMonomial") -> "QMonomial":
        if self.pp != other.pp:
            raise ValueError("mixed prime powers: %s vs %s" % (self.pp, other.pp))
        return qmon(self.pp, self.coeff * other.coeff, self.pexp + other.pexp)

    def __truediv__(self, other: "QMonomial") -> "QMonomial":
        return self * other.inverse()

    def __pow__(self, k: int) -> "QMonomial":
        return qmon(self.pp, self.coeff ** k, self.pexp * k)

    def inverse(self) -> "QMonomial":
        return qmon(self.pp, 1 / self.coeff, -self.pexp)

    def __neg__(self) -> "QMonomial":
        return qmon(self.pp, -self.coeff, self.pexp)

    def __abs__(self) -> "QMonomial":
        return qmon(self.pp, abs(self.coeff), self.pexp)

    def scale(self, c: RationalLike) -> "QMonomial":
        """Multiply by an arbitrary nonzero rational (p-part is renormalized)."""
        return qmon(self.pp, self.coeff * Fraction(c), self.pexp)

    # -- inspection ---------------------------------------------------------

    @property
    def is_positive(self) -> bool:
        return self.coeff > 0

    def rational_value(self) -> Fraction:
        """Exact rational value; requires an integral p-exponent."""
        if self.pexp.denominator != 1:
            raise ValueError("p-exponent %s is not an integer" % (self.pexp,))
        e = self.pexp.numerator
        if e >= 0:
            return self.coeff * self.pp.p ** e
        return self.coeff / self.pp.p ** (-e)

    def as_pair(self) -> Tuple[str, str]:
        """Serialized form: ("num/den" coefficient, "num/den" p-exponent)."""
        return (_frac_str(self.coeff), _frac_str(self.pexp))

    def __str__(self) -> str:
        head = "" if self.coeff == 1 else "%s * " % self.coeff
        return "%s%d^(%s)" % (head, self.pp.p, self.pexp)


def _frac_str(x: Fraction) -> str:
    return "%d/%d" % (x.numerator, x.denominator) if x.denominator != 1 else "%d" % x.numerator


def qmon(pp: PrimePower, coeff: RationalLike, pexp: RationalLike = 0) -> QMonomial:
    """Canonical constructor: migrates the p-part of coeff into the exponent."""
    c = Fraction(coeff)
    e = Fraction(pexp)
    if c == 0:
        raise ValueError("zero is not a q-monomial")
    num, knum = padic_split(c.numerator, pp.p)
    den, kden = padic_split(c.denominator, pp.p)
    return QMonomial(pp, Fraction(num, den), e + knum - kden)


def qmon_one(pp: PrimePower) -> QMonomial:
    return QMonomial(pp, Fraction(1), Fraction(0))


def exp_q(t: RationalLike, pp: PrimePower) -> QMonomial:
    """q**t as a canonical monomial: coefficient 1, p-exponent a*t.

    Satisfies exp_q(len M) = |M| for finite modules over the ring with
    residue field of size q, and exp_q(s + t) = exp_q(s) * exp_q(t).
    """
    return QMonomial(pp, Fraction(1), pp.a * Fraction(t))


def qmon_from_integer(n: int, pp: PrimePower) -> QMonomial:
    """Canonical monomial of a nonzero integer: n = u * p**k -> (u, k)."""
    if n == 0:
        raise ValueError("n must be nonzero")
    return qmon(pp, n, 0)


def qmon_from_rational(x: RationalLike, pp: PrimePower) -> QMonomial:
    x = Fraction(x)
    if x == 0:
        raise ValueError("x must be nonzero")
    return qmon(pp, x, 0)


def qmon_combine(
    factors: Iterable[Tuple[QMonomial, int]], pp: Optional[PrimePower] = None
) -> QMonomial:
    """Exact product of monomials raised to integer powers, in canonical form.

    The empty product is 1; in that case the prime power must be supplied.
    All factors must share a single prime power.
    """
    factors = list(factors)
    if not factors:
        if pp is None:
            raise ValueError("empty product needs an explicit prime power")
        return qmon_one(pp)
    if pp is None:
        pp = factors[0][0].pp
    acc = qmon_one(pp)
    for mono, k in factors:
        if mono.pp != pp:
            raise ValueError("mixed prime powers: %s vs %s" % (mono.pp, pp))
        acc = acc * mono ** k
    return acc
