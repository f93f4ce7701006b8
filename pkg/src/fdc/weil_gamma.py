"""The Galois side: conductors, epsilon magnitudes, and adjoint gamma factors.

The adjoint representation of a scenario splits into a toral summand
(the complexified character lattice) and a root summand (one monomial
representation per root orbit).  Only absolute values are computed, so a
gamma factor reduces to a conductor and two L-factor magnitudes.

The root summand is evaluated twice on purpose: once orbit by orbit
through tame-induction conductors of the inducing characters, and once
through the closed form in terms of the filtration breaks; the two are
asserted equal on every call.  The final assembler divides the product of
the summands by the component-group order (the full coinvariants of the
cocharacter lattice).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

from .galois_roots import (
    FieldInvariants,
    GaloisFrame,
    GRootDatum,
    HoweFiltration,
    NONPOSITIVE,
    OrbitInfo,
    TorusLatticeData,
    torus_lattice_data,
)
from .qexact import PrimePower, QMonomial, exp_q, qmon_combine
from .zlattice import Infinite

RationalLike = Union[int, Fraction]


# -- characters and conductors -----------------------------------------------------


@dataclass(frozen=True)
class CharDescriptor:
    """Ramification data of a one-dimensional character: the ramified flag
    and, when ramified, the depth (0 means tamely ramified)."""

    ramified: bool
    depth: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        if self.ramified and self.depth < 0:
            raise ValueError("depth must be >= 0")


def conductor_char(c: CharDescriptor) -> Fraction:
    """Artin conductor of a character: 0 if unramified, else 1 + depth."""
    return Fraction(0) if not c.ramified else 1 + c.depth


def conductor_tame_induction(ext: FieldInvariants, c: CharDescriptor) -> Fraction:
    """Conductor of a tame induction of a ramified character:
    degree * (1 + depth), the depth measured with the base valuation."""
    if not c.ramified:
        raise ValueError("tame-induction shortcut needs a ramified character")
    return ext.degree * (1 + c.depth)


def conductor_induction_general(disc_val: int, f: int, dim: int,
                                cond_sub: RationalLike) -> Fraction:
    """Conductor of an induced representation: discriminant valuation times
    dimension plus residue degree times the conductor upstairs."""
    if disc_val < 0 or f <= 0 or dim < 0 or Fraction(cond_sub) < 0:
        raise ValueError("inputs must be nonnegative (f positive)")
    return Fraction(disc_val * dim) + f * Fraction(cond_sub)


def eps_abs(cond: RationalLike, pp: PrimePower) -> QMonomial:
    """|epsilon| = q^(cond/2) in the level-zero, self-dual normalization."""
    cond = Fraction(cond)
    if cond < 0:
        raise ValueError("conductor must be nonnegative")
    return exp_q(cond / 2, pp)


def psi_depth(theta_depth: Union[Fraction, str]) -> Fraction:
    """Depth of the inducing character of a root summand: equal to the
    orbit's positive depth, and exactly 0 on the nonpositive part."""
    if theta_depth == NONPOSITIVE:
        return Fraction(0)
    d = Fraction(theta_depth)
    if d <= 0:
        raise ValueError("positive depth expected, got %s" % d)
    return d


# -- the two adjoint summands --------------------------------------------------------


@dataclass(frozen=True)
class ToralGamma:
    monomial: QMonomial
    rational: Fraction
    l0_inverse: int          # |L(0)|^-1 = coinvariant order of Frobenius on M
    l1_inverse_twisted: int  # q^dim(M) |L(1)|^-1 = twisted fixed order


def toral_gamma_abs(torus: TorusLatticeData, dim_sa: int, pp: PrimePower) -> ToralGamma:
    """|gamma| of the toral summand: exp_q((dim S + dim M)/2) times
    (Frobenius coinvariants of M) / (twisted fixed points of its dual)."""
    mono = exp_q(Fraction(dim_sa + torus.rank_m, 2), pp)
    return ToralGamma(
        monomial=mono,
        rational=Fraction(torus.m_frob_coinvariants, torus.special_fiber_order),
        l0_inverse=torus.m_frob_coinvariants,
        l1_inverse_twisted=torus.special_fiber_order,
    )


@dataclass(frozen=True)
class RootGamma:
    monomial: QMonomial
    orbit_conductors: Tuple[Tuple[str, Fraction], ...]


def root_gamma_abs(filtration: HoweFiltration, orbits: Sequence[OrbitInfo],
                   pp: PrimePower) -> RootGamma:
    """|gamma| of the root summand.

    Every inducing character is ramified (depth equal to the orbit's break,
    zero on the nonpositive part), so the L-factors are trivial and the
    answer is a pure epsilon magnitude.  The orbitwise conductor product is
    recomputed against the closed form
    exp_q(|R|/2 + (1/2) sum_i r_i (|R_{i+1}| - |R_i|)); disagreement is an
    internal consistency failure.
    """
    conductors: List[Tuple[str, Fraction]] = []
    factors = []
    for o in orbits:
        depth = psi_depth(filtration.depth_of_orbit(o))
        ext = FieldInvariants(degree=o.degree, e=o.e, f=o.f,
                              disc_valuation=o.degree - o.f)
        cond = conductor_tame_induction(ext, CharDescriptor(True, depth))
        conductors.append((o.orbit_id, cond))
        factors.append((eps_abs(cond, pp), 1))
    orbitwise = qmon_combine(factors, pp)
    nroots = sum(o.size for o in orbits)
    closed_exp = Fraction(nroots, 2)
    for i, delta in enumerate(filtration.layer_sizes()):
        closed_exp += Fraction(filtration.breaks[i] * delta, 2)
    closed = exp_q(closed_exp, pp)
    if orbitwise != closed:
        raise AssertionError(
            "orbitwise conductor product %s disagrees with the closed form %s"
            % (orbitwise, closed))
    return RootGamma(monomial=closed, orbit_conductors=tuple(conductors))


def component_group_order(datum: GRootDatum, frame: GaloisFrame,
                          torus: Optional[TorusLatticeData] = None) -> int:
    """Order of the component group: full coinvariants of the cocharacter
    lattice under the whole frame action (finite by ellipticity)."""
    if torus is None:
        torus = torus_lattice_data(datum, frame)
    order = torus.cochar_full_coinvariants
    if isinstance(order, Infinite):
        raise ValueError("component group is infinite; datum is not elliptic")
    return order


# -- the assembled Galois side ----------------------------------------------------


@dataclass(frozen=True)
class AdjointSummary:
    """Everything the adjoint-value assembly consumes, in one record:
    the torus lattice data (the inertia-fixed sublattice with its
    Frobenius), the torus dimension, the root count, the filtration level
    sizes with their breaks, and the residue size."""

    torus: TorusLatticeData
    dim_sa: int
    n_roots: int
    level_sizes: Tuple[int, ...]
    breaks: Tuple[Fraction, ...]
    pp: PrimePower

    @property
    def dim_ga(self) -> int:
        return self.dim_sa + self.n_roots

    def break_term(self) -> Fraction:
        total = Fraction(0)
        deltas = [b - a for a, b in zip(self.level_sizes, self.level_sizes[1:])]
        for r, delta in zip(self.breaks, deltas):
            total += r * delta
        return total / 2


def adjoint_summary(datum: GRootDatum, frame: GaloisFrame,
                    filtration: HoweFiltration, orbits: Sequence[OrbitInfo],
                    torus: Optional[TorusLatticeData] = None) -> AdjointSummary:
    if torus is None:
        torus = torus_lattice_data(datum, frame)
    return AdjointSummary(
        torus=torus,
        dim_sa=datum.rank,
        n_roots=sum(o.size for o in orbits),
        level_sizes=filtration.sizes,
        breaks=filtration.breaks,
        pp=frame.pp,
    )


@dataclass(frozen=True)
class GaloisSide:
    pp: PrimePower
    monomial: QMonomial
    prefactor: Fraction
    summary: AdjointSummary
    toral: ToralGamma
    root: RootGamma
    component_order: int

    @property
    def value(self) -> Tuple[Fraction, QMonomial]:
        return (self.prefactor, self.monomial)


def galois_side(datum: GRootDatum, frame: GaloisFrame, filtration: HoweFiltration,
                orbits: Sequence[OrbitInfo],
                torus: Optional[TorusLatticeData] = None) -> GaloisSide:
    """Assembled Galois-side value: (toral gamma * root gamma) divided by
    the component-group order, also recomputed from the direct formula
    exp_q(dim(G)/2 + dim(M)/2 + break term) with the rational prefactor
    |M_Frob| / (|component| * |twisted fixed|); both assemblies must agree.
    """
    summary = adjoint_summary(datum, frame, filtration, orbits, torus)
    torus = summary.torus
    pp = frame.pp
    toral = toral_gamma_abs(torus, summary.dim_sa, pp)
    root = root_gamma_abs(filtration, orbits, pp)
    comp = component_group_order(datum, frame, torus)
    product_monomial = toral.monomial * root.monomial
    product_rational = toral.rational / comp

    direct_exp = Fraction(summary.dim_ga + torus.rank_m, 2) + summary.break_term()
    direct_monomial = exp_q(direct_exp, pp)
    direct_rational = Fraction(torus.m_frob_coinvariants,
                               comp * torus.special_fiber_order)
    if direct_monomial != product_monomial or direct_rational != product_rational:
        raise AssertionError("adjoint assembly disagrees with the direct formula")
    return GaloisSide(
        pp=pp,
        monomial=direct_monomial,
        prefactor=direct_rational,
        summary=summary,
        toral=toral,
        root=root,
        component_order=comp,
    )
