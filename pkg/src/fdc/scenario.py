"""Scenario files: loading, validation, serialization, and generation.

A scenario bundles a frame, a root datum, jump offsets, per-orbit depths
with the total depth, optional character data, and the depth-zero mode.
Everything on disk is exact: rationals are "num/den" strings and group
structure is explicit (multiplication table, or permutation generators
with the documented breadth-first element numbering).

Validation is collective: all module validators run and the failures come
back together, each naming the offending component, rather than stopping
at the first problem.

The generator builds valid scenarios by construction: it assigns depth
layers orbit-pair by orbit-pair, draws breaks inside the valuation
lattices the depth checks require, derives negation-symmetric offsets,
and retries the rare draws that violate the rational-closure condition.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from .chi_data import ChiData, character_group, char_conjugate, char_inverse, validate_chi
from .formal_degree import DepthZeroData, YuShape
from .galois_roots import (
    FiniteGroup,
    GaloisFrame,
    GRootDatum,
    HoweFiltration,
    NONPOSITIVE,
    OrbitInfo,
    TorusLatticeData,
    classify_orbits,
    howe_filtration,
    parse_root_key,
    root_key,
    torus_lattice_data,
    validate_depth_lattice,
)
from .mp_filtration import JumpAssignment
from .qexact import PrimePower

DepthValue = Union[Fraction, str]


class ScenarioError(ValueError):
    """Validation failure with structured provenance."""

    def __init__(self, failures: Sequence[Tuple[str, str, str]]):
        self.failures = list(failures)
        lines = ["%s.%s: %s" % f for f in self.failures]
        super().__init__("scenario validation failed:\n  " + "\n  ".join(lines))


def parse_fraction(text: Union[str, int]) -> Fraction:
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str):
        raise ValueError("rational must be a string, got %r" % (text,))
    parts = text.strip().split("/")
    if len(parts) == 1:
        return Fraction(int(parts[0]))
    if len(parts) != 2:
        raise ValueError("malformed rational %r" % text)
    num, den = int(parts[0]), int(parts[1])
    if den == 0:
        raise ValueError("malformed rational %r (zero denominator)" % text)
    return Fraction(num, den)


def fraction_str(x: Fraction) -> str:
    return "%d/%d" % (x.numerator, x.denominator) if x.denominator != 1 else str(x.numerator)


@dataclass
class Scenario:
    """A fully validated tame elliptic scenario."""

    name: str
    pp: PrimePower
    frame: GaloisFrame
    datum: GRootDatum
    orbits: Tuple[OrbitInfo, ...]
    jumps: JumpAssignment
    theta_depths: Dict[str, DepthValue]
    theta_total_depth: Fraction
    filtration: HoweFiltration
    depth_zero: DepthZeroData
    chi: Optional[ChiData] = None
    options: Dict[str, object] = field(default_factory=dict)
    group_encoding: Optional[Dict[str, object]] = None  # preserved for round-trips

    def shape(self) -> YuShape:
        return YuShape(self.filtration, self.orbits, self.jumps,
                       self.datum.rank, self.pp)

    @property
    def unverified_assumptions(self) -> Tuple[str, ...]:
        """Conditions the combinatorial model cannot check and records as
        metadata: with the character abstracted to depth data, the
        regularity constraints on its depth-zero restriction (trivial
        stabilizer under the rational Weyl action, inertia-stable positive
        system) are assumed, not verified."""
        flags = []
        if self.depth_zero.regular:
            flags.append("depth-zero regularity of the character is assumed "
                         "(not derivable from depth data)")
        if self.filtration.levels[0]:
            flags.append("inertia-stable positivity on the zeroth level is assumed")
        return tuple(flags)

    def torus(self) -> TorusLatticeData:
        return torus_lattice_data(self.datum, self.frame)

    def with_q(self, pp: PrimePower) -> "Scenario":
        """The same combinatorial scenario at a different residue size."""
        frame = GaloisFrame(self.frame.group, self.frame.inertia,
                            self.frame.frobenius, pp, self.frame.carrier)
        return Scenario(self.name, pp, frame, self.datum, self.orbits, self.jumps,
                        dict(self.theta_depths), self.theta_total_depth,
                        self.filtration, self.depth_zero, self.chi,
                        dict(self.options), self.group_encoding)

    # -- serialization -------------------------------------------------------

    def to_json_dict(self) -> Dict[str, object]:
        group: Dict[str, object]
        if self.group_encoding is not None:
            group = dict(self.group_encoding)
        else:
            group = {"order": self.frame.group.order,
                     "mult_table": [list(r) for r in self.frame.group.table]}
        doc: Dict[str, object] = {
            "name": self.name,
            "q": {"p": self.pp.p, "a": self.pp.a},
            "group": group,
            "inertia": sorted(self.frame.inertia),
            "frobenius": self.frame.frobenius,
            "lattice_rank": self.datum.rank,
            "action": {str(g): [list(row) for row in m]
                       for g, m in sorted(self.datum.action.items())},
            "roots": [list(r) for r in sorted(self.datum.roots)],
            "jump_offsets": {oid: fraction_str(off)
                             for oid, off in sorted(self.jumps.offsets.items())},
            "theta_depths": {oid: (val if val == NONPOSITIVE else fraction_str(val))
                             for oid, val in sorted(self.theta_depths.items())},
            "theta_total_depth": fraction_str(self.theta_total_depth),
        }
        if self.depth_zero.regular:
            doc["depth_zero"] = "regular"
        else:
            doc["depth_zero"] = {"dim_rho": fraction_str(self.depth_zero.dim_rho),
                                 "stab_index": self.depth_zero.stab_index}
        if self.chi is not None:
            doc["chi"] = {root_key(root): {str(g): fraction_str(v)
                                           for g, v in sorted(c.items())}
                          for root, c in sorted(self.chi.chars.items())}
        if self.options:
            doc["options"] = dict(self.options)
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n"


def _build_group(spec: Mapping[str, object],
                 fail: List[Tuple[str, str, str]]) -> Optional[FiniteGroup]:
    if "mult_table" in spec:
        table = spec["mult_table"]
        try:
            g = FiniteGroup(table)
        except (ValueError, TypeError, IndexError) as e:
            fail.append(("galois_roots", "group.mult_table", str(e)))
            return None
        if "order" in spec and spec["order"] != g.order:
            fail.append(("galois_roots", "group.order", "declared order disagrees"))
        return g
    if "perm_gens" in spec:
        try:
            g, _elems = FiniteGroup.from_permutations(spec["perm_gens"])
        except (ValueError, TypeError, IndexError) as e:
            fail.append(("galois_roots", "group.perm_gens", str(e)))
            return None
        if "order" in spec and spec["order"] != g.order:
            fail.append(("galois_roots", "group.order", "declared order disagrees"))
        return g
    fail.append(("galois_roots", "group", "need mult_table or perm_gens"))
    return None


def scenario_from_dict(doc: Mapping[str, object]) -> Scenario:
    """Parse and fully validate one scenario document.

    Raises :class:`ScenarioError` carrying every failure with its module
    and field provenance.
    """
    failures: List[Tuple[str, str, str]] = []

    name = doc.get("name")
    if not isinstance(name, str) or not name:
        failures.append(("cli", "name", "missing or empty"))
        name = "<unnamed>"

    pp = None
    try:
        qspec = doc["q"]
        pp = PrimePower(int(qspec["p"]), int(qspec["a"]))
    except KeyError:
        failures.append(("qexact", "q", "missing p or a"))
    except (ValueError, TypeError) as e:
        failures.append(("qexact", "q", str(e)))

    group = None
    if "group" in doc:
        group = _build_group(doc["group"], failures)
    else:
        failures.append(("galois_roots", "group", "missing"))
    if group is None or pp is None:
        raise ScenarioError(failures)

    frame = None
    try:
        inertia = frozenset(int(x) for x in doc.get("inertia", []))
        frobenius = int(doc.get("frobenius", 0))
        frame = GaloisFrame(group, inertia, frobenius, pp)
    except (ValueError, TypeError) as e:
        failures.append(("galois_roots", "frame", str(e)))

    datum = None
    try:
        rank = int(doc["lattice_rank"])
        action = {int(g): [[int(x) for x in row] for row in m]
                  for g, m in doc["action"].items()}
        roots = frozenset(tuple(int(x) for x in r) for r in doc["roots"])
        datum = GRootDatum(rank, action, roots)
        if frame is not None:
            datum.check_against_frame(frame)
    except KeyError as e:
        failures.append(("galois_roots", "datum", "missing field %s" % e))
        datum = None
    except (ValueError, TypeError) as e:
        failures.append(("galois_roots", "GRootDatum", str(e)))
        datum = None
    if frame is None or datum is None:
        raise ScenarioError(failures)

    orbits = tuple(classify_orbits(datum, frame))

    jumps = None
    try:
        raw_offsets = {oid: parse_fraction(v)
                       for oid, v in doc.get("jump_offsets", {}).items()}
        jumps = JumpAssignment.build(raw_offsets, orbits)
    except (ValueError, TypeError) as e:
        failures.append(("mp_filtration", "jump_offsets", str(e)))

    depths: Dict[str, DepthValue] = {}
    total = Fraction(0)
    filtration = None
    try:
        for oid, v in doc.get("theta_depths", {}).items():
            depths[oid] = NONPOSITIVE if v == NONPOSITIVE else parse_fraction(v)
        total = parse_fraction(doc.get("theta_total_depth", "0"))
        filtration = howe_filtration(datum, frame, depths, total)
    except (ValueError, TypeError) as e:
        failures.append(("galois_roots", "theta_depths", str(e)))

    if filtration is not None:
        checks = validate_depth_lattice(filtration, orbits)
        for c in checks:
            if not c.ok:
                failures.append(("galois_roots", "theta_depths",
                                 "break %s at orbit %s violates the depth lattice "
                                 "(value group: %s, half lattice: %s)"
                                 % (c.break_value, c.orbit_id,
                                    c.in_value_group, c.in_half_value_group)))

    dz_spec = doc.get("depth_zero", "regular")
    depth_zero = DepthZeroData.regular_marker()
    if dz_spec != "regular":
        try:
            depth_zero = DepthZeroData.opaque(parse_fraction(dz_spec["dim_rho"]),
                                              int(dz_spec["stab_index"]))
        except (KeyError, ValueError, TypeError) as e:
            failures.append(("formal_degree", "depth_zero", str(e)))

    chi = None
    if "chi" in doc:
        try:
            chars = {}
            for rk, table in doc["chi"].items():
                root = parse_root_key(rk)
                chars[root] = {int(g): parse_fraction(v) % 1 for g, v in table.items()}
            chi = ChiData(chars)
            diag = validate_chi(chi, datum, frame)
            if not diag.valid:
                for msg in diag.cond1_failures + diag.cond2_failures:
                    failures.append(("chi_data", "chi", msg))
        except (ValueError, TypeError) as e:
            failures.append(("chi_data", "chi", str(e)))

    if failures:
        raise ScenarioError(failures)

    # ellipticity-dependent lattice data must be computable
    try:
        torus_lattice_data(datum, frame)
    except ValueError as e:
        raise ScenarioError([("zlattice", "torus", str(e))])

    return Scenario(
        name=name, pp=pp, frame=frame, datum=datum, orbits=orbits, jumps=jumps,
        theta_depths=depths, theta_total_depth=total, filtration=filtration,
        depth_zero=depth_zero, chi=chi, options=dict(doc.get("options", {})),
        group_encoding=dict(doc["group"]) if "perm_gens" in doc["group"] else None,
    )


def load_scenario(path: str) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise ScenarioError([("cli", "file", "parse error: %s" % e)])
    return scenario_from_dict(doc)


def dump_scenario(scenario: Scenario, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(scenario.to_json())


# -- random generation ------------------------------------------------------------


def _rot4() -> List[List[int]]:
    return [[0, -1], [1, 0]]


def _rot3() -> List[List[int]]:
    return [[0, -1], [1, -1]]


def _rot6() -> List[List[int]]:
    return [[1, -1], [1, 0]]


def _cyclic_action(n: int, mat: List[List[int]], rank: int) -> Dict[int, List[List[int]]]:
    """Action of Z/n generated by one matrix (whose order divides n)."""
    from .zlattice import identity_matrix, mat_mul
    out = {0: identity_matrix(rank)}
    cur = identity_matrix(rank)
    for k in range(1, n):
        cur = mat_mul(mat, cur)
        out[k] = cur
    return out


def _orbit_closure(action: Mapping[int, List[List[int]]], seeds: Sequence[Tuple[int, ...]]) -> frozenset:
    from .zlattice import mat_vec
    roots = set()
    for s in seeds:
        for m in action.values():
            v = mat_vec(m, s)
            roots.add(v)
            roots.add(tuple(-x for x in v))
    return frozenset(roots)


@dataclass(frozen=True)
class _Template:
    key: str
    group: FiniteGroup
    action: Mapping[int, List[List[int]]]
    rank: int
    seed_choices: Tuple[Tuple[Tuple[int, ...], ...], ...]
    inertia_choices: Tuple[Tuple[int, ...], ...]
    primes: Tuple[int, ...]


def _templates() -> List[_Template]:
    from .zlattice import identity_matrix, mat_mul
    out: List[_Template] = []

    g2 = FiniteGroup.cyclic(2)
    out.append(_Template(
        "a1", g2, {0: [[1]], 1: [[-1]]}, 1,
        (((2,),), ((1,),)),
        ((0,), (0, 1)),
        (3, 5, 7)))

    g4 = FiniteGroup.cyclic(4)
    out.append(_Template(
        "a1_z4", g4, _cyclic_action(4, [[-1]], 1), 1,
        (((1,),), ((2,),)),
        ((0,), (0, 2), (0, 1, 2, 3)),
        (3, 5, 7)))

    out.append(_Template(
        "b2_rot4", g4, _cyclic_action(4, _rot4(), 2), 2,
        (((1, 0),), ((1, 1),), ((1, 0), (1, 1))),
        ((0,), (0, 2), (0, 1, 2, 3)),
        (3, 5, 7)))

    g3 = FiniteGroup.cyclic(3)
    out.append(_Template(
        "a2_rot3", g3, _cyclic_action(3, _rot3(), 2), 2,
        (((1, 0),),),
        ((0,), (0, 1, 2)),
        (5, 7)))

    g6 = FiniteGroup.cyclic(6)
    out.append(_Template(
        "a2_rot6", g6, _cyclic_action(6, _rot6(), 2), 2,
        (((1, 0),),),
        ((0,), (0, 3), (0, 2, 4)),
        (5, 7)))

    s3, _ = FiniteGroup.from_permutations([[1, 2, 0], [1, 0, 2]])
    gens_perm = [[1, 2, 0], [1, 0, 2]]
    gens_mat = [_rot3(), [[0, 1], [1, 0]]]
    ident = (0, 1, 2)
    elems = [ident]
    index = {ident: 0}
    mats = {0: identity_matrix(2)}
    queue = [ident]
    while queue:
        cur = queue.pop(0)
        for gp, gm in zip(gens_perm, gens_mat):
            nxt = tuple(gp[cur[i]] for i in range(3))
            if nxt not in index:
                index[nxt] = len(elems)
                mats[len(elems)] = mat_mul(gm, mats[index[cur]])
                elems.append(nxt)
                queue.append(nxt)
    rot = next(h for h in s3.elements if s3.element_order(h) == 3)
    a3 = tuple(sorted(s3.subgroup_generated([rot])))
    out.append(_Template(
        "s3_a2", s3, mats, 2,
        (((1, 0),),),
        (a3, tuple(range(6))),
        (5, 7)))

    kl = FiniteGroup([[0, 1, 2, 3], [1, 0, 3, 2], [2, 3, 0, 1], [3, 2, 1, 0]], check=False)
    kl_action = {0: identity_matrix(2), 1: [[-1, 0], [0, 1]],
                 2: [[1, 0], [0, -1]], 3: [[-1, 0], [0, -1]]}
    out.append(_Template(
        "klein", kl, kl_action, 2,
        (((1, 1),), ((1, 0), (0, 1)), ((1, 1), (1, 0), (0, 1))),
        ((0, 1), (0, 2), (0, 3)),
        (3, 5, 7)))

    base = [[-1, 0, 0], [0, 0, -1], [0, 1, 0]]
    out.append(_Template(
        "mixed_rank3_z4", g4, _cyclic_action(4, base, 3), 3,
        (((2, 0, 0), (0, 1, 0)), ((2, 0, 0), (0, 1, 1)), ((0, 1, 0), (0, 1, 1))),
        ((0,), (0, 2)),
        (3, 5, 7)))

    g2r2 = FiniteGroup.cyclic(2)
    out.append(_Template(
        "rank2_minus", g2r2, {0: identity_matrix(2), 1: [[-1, 0], [0, -1]]}, 2,
        (((1, 0), (0, 1)), ((1, 0), (0, 1), (1, 1), (1, -1))),
        ((0,), (0, 1)),
        (3, 5, 7)))
    return out


_TEMPLATE_CACHE: Optional[List[_Template]] = None


def generator_templates() -> List[_Template]:
    global _TEMPLATE_CACHE
    if _TEMPLATE_CACHE is None:
        _TEMPLATE_CACHE = _templates()
    return _TEMPLATE_CACHE


def _random_chi(rng: random.Random, datum: GRootDatum, frame: GaloisFrame) -> Optional[ChiData]:
    """A random valid character family, or None when a draw cannot satisfy
    the symmetric-class constraint (rare; caller treats None as 'omit')."""
    from .chi_data import pm_classes, _stab
    g = frame.group
    rep_chars = {}
    for _cid, rep, members in pm_classes(datum, frame):
        stab = _stab(datum, g, rep, within=frame.carrier_set)
        chars = character_group(g, stab)
        neg = tuple(-x for x in rep)
        negators = [s for s in sorted(frame.carrier_set) if datum.act(s, rep) == neg]
        if negators:
            sigma = negators[0]
            ok = [c for c in chars
                  if char_conjugate(g, c, g.inv(sigma)) == char_inverse(c)]
            if not ok:
                return None
            rep_chars[rep] = rng.choice(ok)
        else:
            rep_chars[rep] = rng.choice(chars)
    try:
        return ChiData.from_representatives(datum, frame, rep_chars)
    except ValueError:
        return None


def generate_scenario(rng: random.Random, name_prefix: str = "gen") -> Scenario:
    """One random valid scenario (rank <= 3, |R| <= 12, |group| <= 8, e <= 4)."""
    templates = generator_templates()
    for _attempt in range(200):
        tpl = rng.choice(templates)
        p = rng.choice(tpl.primes)
        a = rng.choice((1, 1, 1, 2))
        pp = PrimePower(p, a)
        inertia = frozenset(rng.choice(tpl.inertia_choices))
        if len(inertia) % p == 0:
            continue
        group = tpl.group
        # any element generating the quotient by inertia
        frob_candidates = [h for h in group.elements
                           if len(group.subgroup_generated(sorted(inertia) + [h])) == group.order]
        if not frob_candidates:
            continue
        frobenius = rng.choice(frob_candidates)
        try:
            frame = GaloisFrame(group, inertia, frobenius, pp)
        except ValueError:
            continue
        seeds = rng.choice(tpl.seed_choices)
        roots = _orbit_closure(tpl.action, seeds)
        if len(roots) > 12:
            continue
        try:
            datum = GRootDatum(tpl.rank, tpl.action, roots)
            datum.check_against_frame(frame)
        except ValueError:
            continue
        orbits = classify_orbits(datum, frame)
        if any(o.e > 4 for o in orbits):
            continue
        scen = _assign_depths_and_offsets(rng, tpl.key, pp, frame, datum, orbits,
                                          name_prefix)
        if scen is not None:
            return scen
    raise RuntimeError("generator failed to produce a valid scenario")


def _assign_depths_and_offsets(rng: random.Random, key: str, pp: PrimePower,
                               frame: GaloisFrame, datum: GRootDatum,
                               orbits: Sequence[OrbitInfo],
                               name_prefix: str) -> Optional[Scenario]:
    # negation-paired orbit classes
    pairs: List[Tuple[str, ...]] = []
    seen = set()
    for o in orbits:
        if o.orbit_id in seen:
            continue
        seen.add(o.orbit_id)
        if o.negation_id != o.orbit_id:
            seen.add(o.negation_id)
            pairs.append((o.orbit_id, o.negation_id))
        else:
            pairs.append((o.orbit_id,))
    by_id = {o.orbit_id: o for o in orbits}

    for _try in range(40):
        d = rng.choice((0, 1, 1, 2))
        d = min(d, len(pairs))
        layers: Dict[str, int] = {}
        if d == 0:
            for pr in pairs:
                for oid in pr:
                    layers[oid] = 0
        else:
            for pr in pairs:
                lay = rng.randint(0, d)
                for oid in pr:
                    layers[oid] = lay
            used = sorted({v for v in layers.values() if v > 0})
            remap = {v: i + 1 for i, v in enumerate(used)}
            layers = {oid: (remap[v] if v > 0 else 0) for oid, v in layers.items()}
            d = len(used)
        # draw strictly increasing breaks inside the valuation lattices
        breaks: List[Fraction] = []
        ok = True
        prev = Fraction(0)
        for i in range(1, d + 1):
            es = [by_id[oid].e for oid, lay in layers.items() if lay == i]
            gcd_e = 0
            for e in es:
                gcd_e = e if gcd_e == 0 else _gcd(gcd_e, e)
            unit = Fraction(1, gcd_e)
            lo = int(prev / unit) + 1
            hi = int(Fraction(3) / unit)
            if lo > hi:
                ok = False
                break
            k = rng.randint(lo, min(hi, lo + 5))
            val = k * unit
            breaks.append(val)
            prev = val
        if not ok:
            continue
        total = breaks[-1] if breaks else Fraction(0)
        if rng.random() < 0.3:
            total += Fraction(rng.randint(1, 4), 2)
        depths: Dict[str, DepthValue] = {}
        for oid, lay in layers.items():
            depths[oid] = NONPOSITIVE if lay == 0 else breaks[lay - 1]
        offsets: Dict[str, Fraction] = {}
        for pr in pairs:
            o = by_id[pr[0]]
            if len(pr) == 1:
                offsets[pr[0]] = rng.choice((Fraction(0), Fraction(1, 2 * o.e)))
            else:
                t = Fraction(rng.randint(0, 2 * o.e - 1), 2 * o.e)
                offsets[pr[0]] = t
                offsets[pr[1]] = -t
        # Keep the depth-zero root count even (a symmetric odd-degree orbit
        # jumping at 0 matches no honest reductive quotient): flip one such
        # offset off the origin if needed.
        parity = 0
        for pr in pairs:
            if layers[pr[0]] != 0:
                continue
            for oid in pr:
                o = by_id[oid]
                if (offsets[oid] * o.e).denominator == 1:
                    parity += o.f
        if parity % 2:
            for pr in pairs:
                o = by_id[pr[0]]
                if (len(pr) == 1 and layers[pr[0]] == 0 and o.f % 2
                        and (offsets[pr[0]] * o.e).denominator == 1):
                    offsets[pr[0]] = Fraction(1, 2 * o.e)
                    break
        try:
            filtration = howe_filtration(datum, frame, depths, total)
        except ValueError:
            continue
        checks = validate_depth_lattice(filtration, orbits)
        if any(not c.ok for c in checks):
            continue
        jumps = JumpAssignment.build(offsets, orbits)
        chi = _random_chi(rng, datum, frame) if rng.random() < 0.5 else None
        name = "%s_%s_%04d" % (name_prefix, key, rng.randint(0, 9999))
        return Scenario(
            name=name, pp=pp, frame=frame, datum=datum, orbits=tuple(orbits),
            jumps=jumps, theta_depths=depths, theta_total_depth=total,
            filtration=filtration, depth_zero=DepthZeroData.regular_marker(),
            chi=chi, options={},
        )
    return None


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a
