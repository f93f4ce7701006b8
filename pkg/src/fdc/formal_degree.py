"""The automorphic side: exact formal degrees from scenario combinatorics.

Two evaluation routes are provided and cross-checked.  The general route
takes opaque depth-zero inputs (a dimension and a stabilizer index) and
evaluates the closed formula

    dim(rho) / index * exp_q( dim(G)/2 + dim(reductive quotient)/2
                              + (1/2) sum_i r_i (|R_{i+1}| - |R_i|) ).

The regular route derives the depth-zero contribution from the torus
lattice: the prefactor is the reciprocal of the special-fiber torus order,
and the quotient dimension term degrades to the quotient rank.  The
regular result is produced in both published prefactor normalizations
(special-fiber order versus full point index); their ratio is the
Kottwitz-style component index and is reported, never silently dropped.

The module also exposes the intermediate quantities of the derivation:
per-step Heisenberg dimensions, the volume-normalization exponent
assembled from raw torsor enumeration, and the same exponent from the
closed length identity, so that the two can be asserted equal.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Tuple, Union

from .galois_roots import (
    GaloisFrame,
    GRootDatum,
    HoweFiltration,
    OrbitInfo,
    TorusLatticeData,
    torus_lattice_data,
    validate_depth_lattice,
)
from .mp_filtration import JumpAssignment, jump_length_at, count_torsor_points, just_above, at
from .qexact import PrimePower, QMonomial, exp_q

RationalLike = Union[int, Fraction]


# -- shapes and depth-zero data -------------------------------------------------


@dataclass(frozen=True)
class YuShape:
    """The combinatorial residue of a cuspidal datum: Levi chain sizes,
    depth sequence, jumps, and the toral data.

    The depth sequence (r_0, ..., r_d) must satisfy
    0 < r_0 < ... < r_{d-1} <= r_d (for d = 0 only r_0 >= 0); the
    half-depths s_i = r_i / 2 are the indices where the Heisenberg
    quotients live.
    """

    filtration: HoweFiltration
    orbits: Tuple[OrbitInfo, ...]
    jumps: JumpAssignment
    toral_rank: int
    pp: PrimePower

    def __post_init__(self) -> None:
        rvec = self.filtration.rvec()
        d = self.filtration.d
        if d == 0:
            if rvec[0] < 0:
                raise ValueError("depth must be nonnegative")
        else:
            if not rvec[0] > 0:
                raise ValueError("first break must be positive")
            for a, b in zip(rvec, rvec[1:-1]):
                if not a < b:
                    raise ValueError("breaks must increase strictly")
            if not rvec[-2] <= rvec[-1]:
                raise ValueError("total depth must dominate the last break")

    @property
    def dim_ga(self) -> int:
        return self.toral_rank + sum(o.size for o in self.orbits)

    def layer_orbits(self, i: int) -> List[OrbitInfo]:
        """Orbits entering the chain at break i (contained in R_{i+1} - R_i)."""
        return [o for o in self.orbits if self.filtration.layer_of_orbit(o) == i + 1]

    def depth_zero_orbits(self) -> List[OrbitInfo]:
        return [o for o in self.orbits if self.filtration.layer_of_orbit(o) == 0]

    def break_term(self) -> Fraction:
        """(1/2) sum_i r_i (|R_{i+1}| - |R_i|), the wild part of the exponent."""
        total = Fraction(0)
        for i, delta in enumerate(self.filtration.layer_sizes()):
            total += self.filtration.breaks[i] * delta
        return total / 2

    def depth_zero_quotient_dim(self, rank_m: int) -> int:
        """Dimension of the depth-zero reductive quotient: quotient rank plus
        the roots of the zeroth level whose torsor passes through 0."""
        return rank_m + sum(jump_length_at(o, self.jumps, 0)
                            for o in self.depth_zero_orbits())


@dataclass(frozen=True)
class DepthZeroData:
    """Either the regular marker or opaque (dim rho, stabilizer index)."""

    regular: bool
    dim_rho: Optional[Fraction] = None
    stab_index: Optional[int] = None

    @staticmethod
    def regular_marker() -> "DepthZeroData":
        return DepthZeroData(True)

    @staticmethod
    def opaque(dim_rho: RationalLike, stab_index: int) -> "DepthZeroData":
        dim_rho = Fraction(dim_rho)
        if dim_rho <= 0 or stab_index <= 0:
            raise ValueError("opaque depth-zero data must be positive")
        return DepthZeroData(False, dim_rho, stab_index)


# -- elementary degree formulas ---------------------------------------------------


def compact_induction_degree(dim_tau: QMonomial, vol_k: QMonomial) -> QMonomial:
    """Degree of a compact induction: inducing dimension over subgroup volume."""
    if not dim_tau.is_positive or not vol_k.is_positive:
        raise ValueError("dimension and volume must be positive")
    return dim_tau / vol_k


def heisenberg_indices(shape: YuShape) -> List[QMonomial]:
    """The abelian quotient orders [J^{i+1} : J^{i+1}_+], one per break:
    exp_q of the total jump length of the i-th layer at s_i = r_i / 2."""
    out: List[QMonomial] = []
    for i, s in enumerate(shape.filtration.svec()[:-1]):
        length = sum(jump_length_at(o, shape.jumps, s) for o in shape.layer_orbits(i))
        out.append(exp_q(length, shape.pp))
    return out


def heisenberg_dims(shape: YuShape) -> List[QMonomial]:
    """Dimensions of the per-step Heisenberg representations: the square
    roots of the quotient orders (half-integral p-exponents are legal)."""
    return [QMonomial(shape.pp, idx.coeff, idx.pexp / 2)
            for idx in heisenberg_indices(shape)]


def dl_dimension(order_g: int, order_s: int, dim_g: int, rank: int, pp: PrimePower) -> int:
    """Dimension of the +-irreducible induced piece on the finite-group floor:
    index of the torus divided by the Steinberg dimension q^((dim - rank)/2).

    A non-integral result signals inconsistent finite-group data.
    """
    if order_g <= 0 or order_s <= 0:
        raise ValueError("group orders must be positive")
    if order_g % order_s:
        raise ValueError("torus order does not divide the group order")
    if (dim_g - rank) % 2:
        raise ValueError("dim - rank must be even")
    st = pp.q ** ((dim_g - rank) // 2)
    index = order_g // order_s
    if index % st:
        raise ValueError("Steinberg dimension does not divide the index: "
                         "inconsistent finite-group data")
    return index // st


def general_degree(shape: YuShape, dz: DepthZeroData, dim_g0_red: int,
                   len_g0_00plus: Optional[int] = None) -> Tuple[QMonomial, Fraction]:
    """Formal degree from opaque depth-zero data.

    Returns (monomial, rational prefactor) with the monomial
    exp_q(dim(G)/2 + dim_g0_red/2 + break term) and prefactor
    dim(rho) / stabilizer index.  The reductive-quotient dimension equals
    the length of its Lie algebra piece; when both are supplied they must
    agree.
    """
    if dz.regular:
        raise ValueError("general_degree needs opaque depth-zero data")
    if len_g0_00plus is not None and len_g0_00plus != dim_g0_red:
        raise ValueError("depth-zero quotient dimension %d does not match its "
                         "Lie-algebra length %d" % (dim_g0_red, len_g0_00plus))
    if dim_g0_red < 0:
        raise ValueError("quotient dimension must be nonnegative")
    expo = Fraction(shape.dim_ga, 2) + Fraction(dim_g0_red, 2) + shape.break_term()
    return exp_q(expo, shape.pp), Fraction(dz.dim_rho, dz.stab_index)


# -- the regular route -------------------------------------------------------------


@dataclass(frozen=True)
class RegularDegree:
    """Exact regular formal degree with both prefactor normalizations.

    monomial carries the exponential part; the two prefactors divide it by
    the special-fiber torus order and by the full point index respectively.
    Their ratio (the Kottwitz-style fixed-point count on the inertia
    coinvariants) is recorded; a value other than 1 marks the documented
    normalization discrepancy between the two published forms.
    """

    pp: PrimePower
    monomial: QMonomial
    special_fiber_order: int
    full_point_index: int
    discrepancy: int
    torus: TorusLatticeData

    @property
    def value_special_fiber(self) -> Tuple[Fraction, QMonomial]:
        return (Fraction(1, self.special_fiber_order), self.monomial)

    @property
    def value_full_index(self) -> Tuple[Fraction, QMonomial]:
        return (Fraction(1, self.full_point_index), self.monomial)


def regular_degree(shape: YuShape, datum: GRootDatum, frame: GaloisFrame,
                   torus: Optional[TorusLatticeData] = None) -> RegularDegree:
    """Formal degree of a regular scenario, from the torus lattice alone.

    The exponent is dim(G)/2 + rank(M)/2 + sum_i s_i (|R_{i+1}| - |R_i|)
    with s_i = r_i/2; the prefactor is computed both as the reciprocal
    special-fiber order |det(qF - 1)| and as the reciprocal full index
    assembled from the product identity.
    """
    if torus is None:
        torus = torus_lattice_data(datum, frame)
    checks = validate_depth_lattice(shape.filtration, shape.orbits)
    bad = [c for c in checks if not c.ok]
    if bad:
        raise ValueError("depth-lattice validation fails at %s"
                         % ", ".join(c.orbit_id for c in bad))
    expo = Fraction(shape.dim_ga, 2) + Fraction(torus.rank_m, 2) + shape.break_term()
    mono = exp_q(expo, shape.pp)
    special = torus.special_fiber_order
    full = torus.full_point_index
    if full % special:
        raise AssertionError("full index is not a multiple of the special-fiber order")
    return RegularDegree(
        pp=shape.pp,
        monomial=mono,
        special_fiber_order=special,
        full_point_index=full,
        discrepancy=full // special,
        torus=torus,
    )


def regular_as_opaque(shape: YuShape, torus: TorusLatticeData,
                      cover_multiplier: int = 1) -> Tuple[DepthZeroData, int]:
    """Opaque depth-zero inputs reproducing the regular special-fiber value.

    Synthesizes a finite-group order order_G = |S| * q^((dim - rank)/2) * m
    so that the induced dimension is the multiplier m and the ratio
    dim(rho) / order_G collapses to the regular prefactor; feeding the
    result to :func:`general_degree` must reproduce
    :func:`regular_degree`'s special-fiber normalization exactly.
    """
    if cover_multiplier <= 0:
        raise ValueError("multiplier must be positive")
    rank_m = torus.rank_m
    dim_quot = shape.depth_zero_quotient_dim(rank_m)
    order_s = torus.special_fiber_order
    order_g = order_s * shape.pp.q ** ((dim_quot - rank_m) // 2) * cover_multiplier
    dim_rho = dl_dimension(order_g, order_s, dim_quot, rank_m, shape.pp)
    return DepthZeroData.opaque(dim_rho, order_g), dim_quot


# -- volume normalization: the two assemblies of one exponent ----------------------


def volume_exponent_raw(shape: YuShape, rank_m: int) -> Fraction:
    """Exponent of the inverse volume assembly by raw torsor enumeration:
    half the depth-zero length of the full algebra, plus per-layer interior
    lengths up to s_i, plus half the boundary lengths at s_i."""
    total = Fraction(rank_m, 2)
    for o in shape.orbits:
        total += Fraction(jump_length_at(o, shape.jumps, 0), 2)
    svec = shape.filtration.svec()
    for i in range(shape.filtration.d):
        s = svec[i]
        for o in shape.layer_orbits(i):
            total += o.f * count_torsor_points(o, shape.jumps, just_above(0), at(s))
            total += Fraction(jump_length_at(o, shape.jumps, s), 2)
    return total


def volume_exponent_closed(shape: YuShape, rank_m: int) -> Fraction:
    """The same exponent from the closed length identity: half the
    depth-zero Levi length plus the break term."""
    total = Fraction(rank_m, 2)
    for o in shape.depth_zero_orbits():
        total += Fraction(jump_length_at(o, shape.jumps, 0), 2)
    return total + shape.break_term()
