"""Character data on finite Weil models and the associated torus cocycle.

Characters live on stabilizer subgroups of the frame group and take values
in Q/Z (written additively); base change to a subframe is literal
restriction.  A family of such characters indexed by the roots is a valid
datum when it inverts under negation and transforms by conjugation under
the group.

The cocycle attached to a datum and a family of auxiliary choices (orbit
representatives, coset sections) is evaluated additively in the rational
character space modulo the lattice.  The base-change theorem says the
cocycle of the restricted datum agrees on the subgroup with the original
cocycle, for compatibly derived choices; the derivation here follows the
constructive recipe (double-coset sections, conjugated representatives and
conjugation-twisted sections) and the verification is exhaustive over the
subgroup.

Derived subframe sections can take values outside the subgroup: they are
conjugates of top-level section values.  That is harmless because the
characters they feed extend the restricted ones by definition, and the
evaluator only needs the stabilizer to contain the values.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple

from .galois_roots import FiniteGroup, GaloisFrame, GRootDatum, root_key
from .zlattice import smith_normal_form

Root = Tuple[int, ...]
Character = Dict[int, Fraction]  # element -> value in [0, 1)
DualTorusElement = Tuple[Fraction, ...]  # element of X^* tensor Q/Z


def _mod1(x: Fraction) -> Fraction:
    return x % 1


# -- characters of subgroups ---------------------------------------------------


def char_is_homomorphism(group: FiniteGroup, domain: FrozenSet[int],
                         chi: Character) -> bool:
    if set(chi.keys()) != set(domain):
        return False
    if any(not (0 <= v < 1) for v in chi.values()):
        return False
    return all(_mod1(chi[a] + chi[b]) == chi[group.mul(a, b)]
               for a in domain for b in domain)


def char_inverse(chi: Character) -> Character:
    return {g: _mod1(-v) for g, v in chi.items()}


def char_conjugate(group: FiniteGroup, chi: Character, sigma: int) -> Character:
    """The character x -> chi(sigma^-1 x sigma) on the conjugated domain."""
    inv = group.inv(sigma)
    return {group.conj(sigma, g): v for g, v in chi.items()}


def char_restrict(chi: Character, subdomain: FrozenSet[int]) -> Character:
    return {g: v for g, v in chi.items() if g in subdomain}


def char_order(chi: Character) -> int:
    n = 1
    for v in chi.values():
        n = n * v.denominator // _gcd(n, v.denominator)
    return n


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def character_group(group: FiniteGroup, subgroup: FrozenSet[int]) -> List[Character]:
    """All homomorphisms subgroup -> Q/Z, via Smith form of the relation
    lattice of the abelianization.  Deterministic order."""
    elems = sorted(subgroup)
    n = len(elems)
    idx = {g: i for i, g in enumerate(elems)}
    rels: List[List[int]] = []
    for a in elems:
        for b in elems:
            row = [0] * n
            row[idx[a]] += 1
            row[idx[b]] += 1
            row[idx[group.mul(a, b)]] -= 1
            rels.append(row)
    u, d, v = smith_normal_form(rels)
    diag = [d[i][i] for i in range(min(len(rels), n))]
    if len(diag) < n or any(x == 0 for x in diag):
        raise AssertionError("abelianization of a finite group must be finite")
    choices = [range(x) for x in diag]
    out: List[Character] = []
    for combo in itertools.product(*choices):
        y = [Fraction(c, dd) for c, dd in zip(combo, diag)]
        x = [_mod1(sum(Fraction(v[i][j]) * y[j] for j in range(n))) for i in range(n)]
        out.append({g: x[idx[g]] for g in elems})
    return out


# -- chi data --------------------------------------------------------------------


@dataclass
class ChiData:
    """A character for every root, subject to inversion under negation and
    conjugation equivariance (validated separately)."""

    chars: Dict[Root, Character]

    def value(self, root: Root, g: int) -> Fraction:
        chi = self.chars[root]
        if g not in chi:
            raise KeyError("element %d is outside the stabilizer of %s" % (g, root))
        return chi[g]

    @staticmethod
    def trivial(datum: GRootDatum, frame: GaloisFrame) -> "ChiData":
        chars: Dict[Root, Character] = {}
        for root in datum.roots:
            stab = frozenset(g for g in frame.carrier_set if datum.act(g, root) == root)
            chars[root] = {g: Fraction(0) for g in stab}
        return ChiData(chars)

    @staticmethod
    def from_representatives(datum: GRootDatum, frame: GaloisFrame,
                             rep_chars: Mapping[Root, Character]) -> "ChiData":
        """Propagate representative characters across the root set by
        equivariance and negation-inversion; inconsistencies raise."""
        g = frame.group
        car = sorted(frame.carrier_set)
        chars: Dict[Root, Character] = {}

        def assign(root: Root, chi: Character, how: str) -> None:
            if root in chars:
                if chars[root] != chi:
                    raise ValueError("inconsistent propagation at root %s (%s)"
                                     % (root, how))
                return
            chars[root] = chi

        for rep, chi in rep_chars.items():
            if rep not in datum.roots:
                raise ValueError("%s is not a root" % (rep,))
            stab = frozenset(s for s in car if datum.act(s, rep) == rep)
            if not char_is_homomorphism(g, stab, dict(chi)):
                raise ValueError("character at %s is not a homomorphism on the stabilizer"
                                 % (rep,))
            assign(rep, dict(chi), "representative")
        # closure under the two defining moves
        changed = True
        while changed:
            changed = False
            for root in list(chars.keys()):
                chi = chars[root]
                neg = tuple(-x for x in root)
                if neg not in chars:
                    assign(neg, char_inverse(chi), "negation")
                    changed = True
                else:
                    if chars[neg] != char_inverse(chi):
                        raise ValueError("negation condition fails between %s and %s"
                                         % (root, neg))
                for s in car:
                    target = datum.act(s, root)
                    moved = char_conjugate(g, chi, s)
                    if target not in chars:
                        assign(target, moved, "conjugation")
                        changed = True
                    elif chars[target] != moved:
                        raise ValueError("equivariance fails from %s to %s under %d"
                                         % (root, target, s))
        missing = set(datum.roots) - set(chars.keys())
        if missing:
            raise ValueError("no character reaches roots %s" % sorted(missing))
        return ChiData(chars)


@dataclass(frozen=True)
class Gauge:
    """Sign function on roots, odd under negation."""

    signs: Mapping[Root, int]

    def __post_init__(self) -> None:
        for root, s in self.signs.items():
            if s not in (1, -1):
                raise ValueError("gauge values must be +-1")
            neg = tuple(-x for x in root)
            if self.signs.get(neg) != -s:
                raise ValueError("gauge is not odd at %s" % (root,))


@dataclass(frozen=True)
class ChiClassReport:
    class_id: str
    representative: Root
    symmetric: bool
    ramified: Optional[bool]
    template_ok: bool
    template_notes: Tuple[str, ...]
    cond3_witness: Optional[int]          # the designated order-two witness, if any
    cond3_value: Optional[Fraction]       # chi at the witness


@dataclass(frozen=True)
class ChiDiagnostics:
    cond1_failures: Tuple[str, ...]
    cond2_failures: Tuple[str, ...]
    classes: Tuple[ChiClassReport, ...]

    @property
    def valid(self) -> bool:
        return not self.cond1_failures and not self.cond2_failures

    @property
    def minimally_ramified(self) -> bool:
        return self.valid and all(c.template_ok for c in self.classes)


def pm_classes(datum: GRootDatum, frame: GaloisFrame) -> List[Tuple[str, Root, FrozenSet[Root]]]:
    """Classes of roots under the frame carrier together with negation,
    each as (canonical id, canonical representative, member set)."""
    return _pm_classes_within(datum, frame.group, sorted(frame.carrier_set))


def _stab(datum: GRootDatum, group: FiniteGroup, root: Root,
          within: Optional[FrozenSet[int]] = None) -> FrozenSet[int]:
    pool = within if within is not None else frozenset(group.elements)
    return frozenset(s for s in pool if datum.act(s, root) == root)


def _stab_pm(datum: GRootDatum, group: FiniteGroup, root: Root,
             within: Optional[FrozenSet[int]] = None) -> FrozenSet[int]:
    pool = within if within is not None else frozenset(group.elements)
    neg = tuple(-x for x in root)
    return frozenset(s for s in pool if datum.act(s, root) in (root, neg))


def validate_chi(chi: ChiData, datum: GRootDatum, frame: GaloisFrame) -> ChiDiagnostics:
    """Exact check of the two defining conditions, plus classification
    against the minimally ramified template.

    Template: trivial on asymmetric classes; on symmetric unramified
    classes trivial on the inertia part of the stabilizer with order at
    most two on a Frobenius-part generator; on symmetric ramified classes
    the designated order-two witness (the square of a negating element)
    must take the value one half.  The full quadratic-extension condition
    is out of scope at this level of modeling; the witness check is the
    implemented surrogate.
    """
    g = frame.group
    car = frozenset(frame.carrier_set)
    cond1: List[str] = []
    cond2: List[str] = []
    for root in sorted(datum.roots):
        if root not in chi.chars:
            cond2.append("missing character at %s" % (root,))
            continue
        stab = _stab(datum, g, root, within=car)
        if not char_is_homomorphism(g, stab, chi.chars[root]):
            cond2.append("character at %s is not a stabilizer homomorphism" % (root,))
            continue
        neg = tuple(-x for x in root)
        if chi.chars.get(neg) != char_inverse(chi.chars[root]):
            cond1.append("chi(-a) != chi(a)^-1 at %s" % (root,))
        for s in sorted(car):
            target = datum.act(s, root)
            moved = {k: v for k, v in char_conjugate(g, chi.chars[root], s).items() if k in car}
            if chi.chars.get(target) != moved:
                cond2.append("equivariance fails from %s under %d" % (root, s))
                break

    classes: List[ChiClassReport] = []
    for class_id, rep, members in pm_classes(datum, frame):
        if rep not in chi.chars:
            continue
        chi_rep = chi.chars[rep]
        stab = _stab(datum, g, rep, within=car)
        stab_pm = _stab_pm(datum, g, rep, within=car)
        symmetric = tuple(-x for x in rep) in {datum.act(s, rep) for s in car}
        ramified: Optional[bool] = None
        notes: List[str] = []
        ok = True
        witness: Optional[int] = None
        wval: Optional[Fraction] = None
        if not symmetric:
            if any(v != 0 for v in chi_rep.values()):
                ok = False
                notes.append("asymmetric class carries a nontrivial character")
        else:
            neg = tuple(-x for x in rep)
            ramified = any(datum.act(s, rep) == neg for s in frame.inertia)
            inertia_part = stab & frame.inertia
            if not ramified:
                if any(chi_rep[s] != 0 for s in inertia_part):
                    ok = False
                    notes.append("unramified symmetric class ramifies the character")
                frob_gen = _frobenius_part_generator(g, stab, inertia_part)
                if frob_gen is not None and _mod1(2 * chi_rep[frob_gen]) != 0:
                    ok = False
                    notes.append("character order exceeds 2 on the Frobenius part")
            # order-two witness: square of a negating element
            negators = sorted(s for s in stab_pm - stab)
            for tau in negators:
                sq = g.mul(tau, tau)
                if sq != 0:
                    witness = sq
                    wval = chi_rep[sq]
                    break
            if witness is not None and wval != Fraction(1, 2):
                ok = False
                notes.append("sign-extension witness value is %s, not 1/2" % wval)
            if witness is None:
                notes.append("no order-two witness exists in this model; "
                             "sign-extension condition unverified")
        classes.append(ChiClassReport(
            class_id=class_id, representative=rep, symmetric=symmetric,
            ramified=ramified, template_ok=ok, template_notes=tuple(notes),
            cond3_witness=witness, cond3_value=wval))
    return ChiDiagnostics(tuple(cond1), tuple(cond2), tuple(classes))


def _frobenius_part_generator(group: FiniteGroup, stab: FrozenSet[int],
                              inertia_part: FrozenSet[int]) -> Optional[int]:
    """Element of the stabilizer whose class generates stabilizer/(inertia part)."""
    quotient_size = len(stab) // len(inertia_part)
    if quotient_size == 1:
        return None
    for s in sorted(stab):
        # order of s in the quotient
        k, x = 1, s
        while x not in inertia_part:
            x = group.mul(x, s)
            k += 1
        if k == quotient_size:
            return s
    return None


def base_change_chi(chi: ChiData, subgroup: FrozenSet[int], datum: GRootDatum,
                    frame: GaloisFrame, subframe: "GaloisFrame") -> ChiData:
    """Restriction of the datum to a subframe: each character restricted to
    the subgroup part of its stabilizer; the result is validated there."""
    g = frame.group
    chars: Dict[Root, Character] = {}
    for root, c in chi.chars.items():
        stab_sub = _stab(datum, g, root, within=subgroup)
        chars[root] = char_restrict(c, stab_sub)
    out = ChiData(chars)
    diag = validate_chi(out, datum, subframe)
    if not diag.valid:
        raise AssertionError("restricted chi data fail validation: %s"
                             % (diag.cond1_failures + diag.cond2_failures,))
    return out


# -- sections and the cocycle ----------------------------------------------------


@dataclass
class SectionChoices:
    """Auxiliary choices for the cocycle: one representative per class of
    roots modulo the group and negation, a section of the plus-minus
    stabilizer cosets, and a section of the stabilizer cosets inside the
    plus-minus stabilizer.  Sections are keyed by the minimal element of
    the coset.  Section values normally lie in the evaluation subgroup;
    derived subframe sections may take ambient values (see module notes).
    """

    reps: Dict[str, Root]
    u: Dict[str, Dict[int, int]]
    v: Dict[str, Dict[int, int]]


def _right_cosets_in(group: FiniteGroup, subgroup: Sequence[int],
                     ambient: Sequence[int]) -> List[FrozenSet[int]]:
    """Right cosets subgroup\\ambient inside the subgroup `ambient` of the group."""
    seen: Dict[int, FrozenSet[int]] = {}
    out = []
    for a in sorted(ambient):
        if a in seen:
            continue
        coset = frozenset(group.mul(h, a) for h in subgroup)
        for y in coset:
            seen[y] = coset
        out.append(coset)
    return out


def default_choices(datum: GRootDatum, frame: GaloisFrame,
                    within: Optional[FrozenSet[int]] = None) -> SectionChoices:
    """Minimal-element representatives and sections, inside the whole group
    or a designated subgroup."""
    g = frame.group
    ambient = sorted(within) if within is not None else sorted(frame.carrier_set)
    reps: Dict[str, Root] = {}
    u: Dict[str, Dict[int, int]] = {}
    v: Dict[str, Dict[int, int]] = {}
    for class_id, rep, _members in _pm_classes_within(datum, g, ambient):
        reps[class_id] = rep
        stab_pm = _stab_pm(datum, g, rep, within=frozenset(ambient))
        stab = _stab(datum, g, rep, within=frozenset(ambient))
        u[class_id] = {min(c): min(c) for c in _right_cosets_in(g, sorted(stab_pm), ambient)}
        v[class_id] = {min(c): min(c) for c in _right_cosets_in(g, sorted(stab), sorted(stab_pm))}
    return SectionChoices(reps, u, v)


def _pm_classes_within(datum: GRootDatum, group: FiniteGroup,
                       ambient: Sequence[int]) -> List[Tuple[str, Root, FrozenSet[Root]]]:
    seen: set = set()
    out = []
    for root in sorted(datum.roots):
        if root in seen:
            continue
        members = set()
        for s in ambient:
            img = datum.act(s, root)
            members.add(img)
            members.add(tuple(-x for x in img))
        rep = min(members)
        out.append((root_key(rep), rep, frozenset(members)))
        seen |= members
    return sorted(out, key=lambda t: t[1])


def _coset_key(group: FiniteGroup, subgroup: FrozenSet[int], elem: int) -> int:
    return min(group.mul(h, elem) for h in subgroup)


def r_chi_eval(chi: ChiData, choices: SectionChoices, w: int, datum: GRootDatum,
               frame: GaloisFrame,
               within: Optional[FrozenSet[int]] = None) -> DualTorusElement:
    """The cocycle value at w, additively in X^* tensor Q/Z.

    For each class with representative a and each coset x of the plus-minus
    stabilizer, the section relations produce first an element of that
    stabilizer, then (through the inner section at the identity coset) an
    element of the stabilizer of a itself; the character value there is
    accumulated with multiplicity the root obtained by moving a with the
    inverse of the outer section value.
    """
    g = frame.group
    ambient = frozenset(within) if within is not None else frozenset(frame.carrier_set)
    if w not in ambient:
        raise ValueError("w must lie in the evaluation subgroup")
    acc = [Fraction(0)] * datum.rank
    for class_id, alpha in sorted(choices.reps.items()):
        stab_pm = _stab_pm(datum, g, alpha, within=ambient)
        stab = _stab(datum, g, alpha, within=ambient)
        u = choices.u[class_id]
        v = choices.v[class_id]
        v0_key = _coset_key(g, stab, 0)
        for x_key in sorted(u.keys()):
            ux = u[x_key]
            xw_key = _coset_key(g, stab_pm, g.mul(x_key, w))
            k = g.mul(g.mul(ux, w), g.inv(u[xw_key]))
            # inner relation at the identity coset of the stabilizer
            v0 = v[v0_key]
            inner_key = _coset_key(g, stab, g.mul(v0_key, k))
            h = g.mul(g.mul(v0, k), g.inv(v[inner_key]))
            val = chi.value(alpha, h)
            if val != 0:
                beta = datum.act(g.inv(ux), alpha)
                for i in range(datum.rank):
                    acc[i] += val * beta[i]
    return tuple(_mod1(x) for x in acc)


def gauge_from_choices(choices: SectionChoices, datum: GRootDatum,
                       frame: GaloisFrame) -> Gauge:
    """The gauge induced by the choices: positive exactly on the roots of
    the form u(x)^-1 applied to a class representative."""
    g = frame.group
    signs: Dict[Root, int] = {}
    for class_id, alpha in choices.reps.items():
        for x_key, ux in choices.u[class_id].items():
            beta = datum.act(g.inv(ux), alpha)
            signs[beta] = 1
            signs[tuple(-x for x in beta)] = -1
    missing = set(datum.roots) - set(signs.keys())
    if missing:
        raise ValueError("choices do not induce a full gauge; missing %s" % sorted(missing))
    return Gauge(signs)


# -- compatible choices and the base-change verification -----------------------


@dataclass(frozen=True)
class CompatiblePair:
    top: SectionChoices
    sub: SectionChoices
    subframe: GaloisFrame
    double_coset_sections: Dict[str, Dict[str, int]]  # top class -> sub class -> c(z)


def subframe_of(frame: GaloisFrame, subgroup: FrozenSet[int]) -> GaloisFrame:
    """The frame of a subgroup: inertia intersects, Frobenius is an element
    whose class generates the (cyclic) quotient of the subgroup by its
    inertia part."""
    g = frame.group
    if not g.is_subgroup(subgroup):
        raise ValueError("not a subgroup")
    inertia_sub = frame.inertia & subgroup
    quotient_size = len(subgroup) // len(inertia_sub)
    frob = None
    for h in sorted(subgroup):
        k, x = 1, h
        while x not in inertia_sub:
            x = g.mul(x, h)
            k += 1
        if k == quotient_size:
            frob = h
            break
    if frob is None:
        raise ValueError("subgroup quotient by its inertia part is not cyclic")
    return GaloisFrame(g, inertia_sub, frob, frame.pp, carrier=subgroup)


def compatible_choices(choices_k: SectionChoices, subgroup: FrozenSet[int],
                       datum: GRootDatum, frame: GaloisFrame) -> CompatiblePair:
    """Derive subframe choices from top-level ones exactly as in the
    constructive base-change proof, and rebuild the top outer section from
    them so that the two cocycles agree on the nose.

    For each top class with representative a: double cosets of the
    plus-minus stabilizer against the subgroup get minimal-element sections
    c(z); each z contributes a subframe class with representative a moved
    by c(z) inverse, a free minimal-element outer section inside the
    subgroup, and an inner section obtained from the top one by conjugating
    through c(z).  The top outer section is then defined on the coset of
    c(z) times an outer subframe section value.
    """
    g = frame.group
    if frame.carrier is not None and frame.carrier_set != frozenset(g.elements):
        raise ValueError("base change must start from the full frame")
    if not g.is_subgroup(subgroup):
        raise ValueError("not a subgroup")
    sub_sorted = sorted(subgroup)
    top = SectionChoices(dict(choices_k.reps), {}, {cid: dict(vv) for cid, vv in choices_k.v.items()})
    sub_reps: Dict[str, Root] = {}
    sub_u: Dict[str, Dict[int, int]] = {}
    sub_v: Dict[str, Dict[int, int]] = {}
    dc_sections: Dict[str, Dict[str, int]] = {}
    for class_id, alpha in sorted(choices_k.reps.items()):
        stab_pm = _stab_pm(datum, g, alpha)
        stab = _stab(datum, g, alpha)
        v_top = choices_k.v[class_id]
        new_u: Dict[int, int] = {}
        dc_sections[class_id] = {}
        for dc in g.double_cosets(stab_pm, subgroup):
            c = min(dc)
            cinv = g.inv(c)
            alpha_z = datum.act(cinv, alpha)
            sub_class_id = root_key(alpha_z)
            if sub_class_id in sub_reps:
                raise AssertionError("double cosets produced a repeated subframe class")
            sub_reps[sub_class_id] = alpha_z
            dc_sections[class_id][sub_class_id] = c
            stab_pm_sub = _stab_pm(datum, g, alpha_z, within=subgroup)
            stab_sub = _stab(datum, g, alpha_z, within=subgroup)
            # free outer section inside the subgroup
            uz = {min(cs): min(cs)
                  for cs in _right_cosets_in(g, sorted(stab_pm_sub), sub_sorted)}
            sub_u[sub_class_id] = uz
            # inner section by conjugation through c; values may leave the
            # subgroup (they live in the ambient stabilizer of alpha_z)
            vz: Dict[int, int] = {}
            for cs in _right_cosets_in(g, sorted(stab_sub), sorted(stab_pm_sub)):
                y_key = min(cs)
                upstairs = _coset_key(g, stab, g.mul(g.mul(c, y_key), cinv))
                vz[y_key] = g.mul(g.mul(cinv, v_top[upstairs]), c)
            sub_v[sub_class_id] = vz
            # rebuild the top outer section on the cosets meeting this double coset
            for y_key, uz_val in uz.items():
                x_elem = g.mul(c, uz_val)
                x_key = _coset_key(g, stab_pm, x_elem)
                if x_key in new_u:
                    raise AssertionError("coset received two derived section values")
                new_u[x_key] = x_elem
        expected = {min(cs) for cs in _right_cosets_in(g, sorted(stab_pm), list(g.elements))}
        if set(new_u.keys()) != expected:
            raise AssertionError("derived top section does not cover all cosets")
        top.u[class_id] = new_u
    sub = SectionChoices(sub_reps, sub_u, sub_v)
    return CompatiblePair(top=top, sub=sub, subframe=subframe_of(frame, subgroup),
                          double_coset_sections=dc_sections)


@dataclass(frozen=True)
class BaseChangeReport:
    ok: bool
    witness: Optional[int]
    lhs: Optional[DualTorusElement]
    rhs: Optional[DualTorusElement]


def verify_base_change(chi: ChiData, subgroup: FrozenSet[int], datum: GRootDatum,
                       frame: GaloisFrame,
                       choices: Optional[SectionChoices] = None,
                       size_bound: int = 16) -> BaseChangeReport:
    """Exhaustive check that the cocycle of the restricted datum matches the
    restriction of the cocycle, over every element of the subgroup, for
    compatibly derived choices."""
    g = frame.group
    if g.order > size_bound:
        raise ValueError("group order %d exceeds the configured bound %d"
                         % (g.order, size_bound))
    if choices is None:
        choices = default_choices(datum, frame)
    pair = compatible_choices(choices, subgroup, datum, frame)
    base_change_chi(chi, subgroup, datum, frame, pair.subframe)  # validates restriction
    for w in sorted(subgroup):
        lhs = r_chi_eval(chi, pair.top, w, datum, frame)
        rhs = r_chi_eval(chi, pair.sub, w, datum, frame, within=subgroup)
        if lhs != rhs:
            return BaseChangeReport(False, w, lhs, rhs)
    return BaseChangeReport(True, None, None, None)
