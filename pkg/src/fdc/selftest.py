"""Randomized property suites behind the selftest subcommand.

Each suite returns the number of checks performed and raises on the first
violation.  The oracles here are deliberately primitive: direct coset
enumeration for lattice quotients, direct primed summation for the
periodic identity, synthetic orbit systems with arbitrary offsets for the
length identity.  Nothing in this module reuses the code path it checks.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Dict, FrozenSet, List, Sequence, Set, Tuple

from .chi_data import verify_base_change
from .compare import VERDICT_UNEQUAL, run_compare
from .galois_roots import OrbitInfo
from .mp_filtration import (
    JumpAssignment,
    JumpFunction,
    master_length_identity,
    periodic_sum_value,
    primed_sum,
)
from .scenario import _random_chi, generate_scenario, generator_templates
from .weil_gamma import CharDescriptor, conductor_induction_general, conductor_tame_induction
from .galois_roots import FieldInvariants
from .zlattice import (
    coinvariants_order,
    dual_action,
    fg_fixed_order,
    group_coinvariants,
    invariant_sublattice,
    mat_mul,
    restrict_endomorphism,
)


# -- synthetic orbit systems for the length identity -------------------------


def synthetic_orbits(rng: random.Random, max_pairs: int = 6,
                     max_e: int = 6, max_roots: int = 24) -> List[OrbitInfo]:
    """Fabricated orbit records with consistent (e, f, degree) and negation
    links; the members are placeholders (never consulted by the sums)."""
    orbits: List[OrbitInfo] = []
    n_pairs = rng.randint(1, max_pairs)
    tag = 0
    total = 0
    for _ in range(n_pairs):
        e = rng.randint(1, max_e)
        f = rng.randint(1, 3)
        degree = e * f
        if total + 2 * degree > max_roots and orbits:
            break
        total += 2 * degree
        symmetric = rng.random() < 0.5
        if symmetric:
            oid = "s%d" % tag
            orbits.append(OrbitInfo(
                orbit_id=oid, members=frozenset({(tag,)}), representative=(tag,),
                stabilizer=frozenset({0}), degree=degree, e=e, f=f,
                symmetric=True, ramified=bool(rng.random() < 0.5), negation_id=oid))
            tag += 1
        else:
            oid_a, oid_b = "a%d" % tag, "a%d" % (tag + 1)
            for oid, other in ((oid_a, oid_b), (oid_b, oid_a)):
                orbits.append(OrbitInfo(
                    orbit_id=oid, members=frozenset({(tag,)}), representative=(tag,),
                    stabilizer=frozenset({0}), degree=degree, e=e, f=f,
                    symmetric=False, ramified=None, negation_id=other))
                tag += 1
    return orbits


def random_jumps(rng: random.Random, orbits: Sequence[OrbitInfo]) -> JumpAssignment:
    offsets: Dict[str, Fraction] = {}
    done: Set[str] = set()
    for o in orbits:
        if o.orbit_id in done:
            continue
        if o.symmetric:
            offsets[o.orbit_id] = rng.choice((Fraction(0), Fraction(1, 2 * o.e)))
            done.add(o.orbit_id)
        else:
            t = Fraction(rng.randint(0, 4 * o.e - 1), 4 * o.e)
            offsets[o.orbit_id] = t
            offsets[o.negation_id] = -t
            done.add(o.orbit_id)
            done.add(o.negation_id)
    return JumpAssignment.build(offsets, orbits)


def suite_master_identity(rng: random.Random, n: int) -> int:
    checks = 0
    for _ in range(n):
        orbits = synthetic_orbits(rng)
        jumps = random_jumps(rng, orbits)
        f: Dict[str, Fraction] = {}
        for o in orbits:
            if o.orbit_id in f:
                continue
            val = Fraction(rng.randint(1, 8 * o.e), 2 * o.e)
            f[o.orbit_id] = val
            f[o.negation_id] = val
        lhs, rhs = master_length_identity(orbits, f, jumps)
        if lhs != rhs:
            raise AssertionError("length identity fails: %s != %s (orbits %s)"
                                 % (lhs, rhs, [(o.orbit_id, o.e, o.f) for o in orbits]))
        checks += 1
    return checks


def suite_periodic_sum(rng: random.Random, n: int) -> int:
    checks = 0
    for _ in range(n):
        lam0 = Fraction(rng.randint(1, 6), rng.randint(1, 6))
        parts = []
        for _k in range(rng.randint(1, 3)):
            denom = rng.randint(1, 4)
            off = Fraction(rng.randint(0, 4 * denom), 4 * denom) * lam0 % lam0
            val = Fraction(rng.randint(1, 5))
            parts.append((off, lam0, val))
            parts.append(((-off) % lam0, lam0, val))
        h = JumpFunction.build({}, parts)
        s = Fraction(rng.randint(1, 8)) * lam0 / 2
        closed = periodic_sum_value(lam0, h, s)
        direct = primed_sum(h, 0, s)
        if closed != direct:
            raise AssertionError("periodic sum fails at lam0=%s s=%s: %s != %s"
                                 % (lam0, s, closed, direct))
        checks += 1
    return checks


# -- lattice identities --------------------------------------------------------


def _random_unimodular(rng: random.Random, rank: int) -> List[List[int]]:
    from .zlattice import identity_matrix
    u = identity_matrix(rank)
    for _ in range(rng.randint(0, 4)):
        i, j = rng.randrange(rank), rng.randrange(rank)
        if i == j:
            continue
        c = rng.randint(-2, 2)
        # column op: col_j += c * col_i
        for r_ in range(rank):
            u[r_][j] += c * u[r_][i]
    return u


def _conjugated_action(rng: random.Random, action: Dict[int, List[List[int]]],
                       rank: int) -> Dict[int, List[List[int]]]:
    from .zlattice import mat_inverse_unimodular
    u = _random_unimodular(rng, rank)
    uinv = mat_inverse_unimodular(u)
    return {g: mat_mul(mat_mul(u, m), uinv) for g, m in action.items()}


def suite_lattice_identity(rng: random.Random, n: int) -> int:
    """Coinvariant factorization |(X^I)_F| * |(X_I)^F| = |X_Gamma| on random
    elliptic lattices with group action, all three orders computed by
    separate routes."""
    templates = generator_templates()
    checks = 0
    while checks < n:
        tpl = rng.choice(templates)
        inertia = frozenset(rng.choice(tpl.inertia_choices))
        group = tpl.group
        frob_candidates = [h for h in group.elements
                           if len(group.subgroup_generated(sorted(inertia) + [h])) == group.order]
        if not frob_candidates:
            continue
        frob = rng.choice(frob_candidates)
        action = _conjugated_action(rng, dict(tpl.action), tpl.rank)
        dual_gens = [dual_action(action[a]) for a in sorted(inertia)]
        dual_all = [dual_action(action[a]) for a in group.elements]
        dual_frob = dual_action(action[frob])
        full = group_coinvariants(tpl.rank, dual_all)
        if full.free_rank:
            raise AssertionError("template action lost ellipticity")
        basis = invariant_sublattice(tpl.rank, dual_gens)
        f_inv = restrict_endomorphism(dual_frob, basis) if basis else []
        first = coinvariants_order(f_inv)
        coinv_i = group_coinvariants(tpl.rank, dual_gens, endo=dual_frob)
        second = fg_fixed_order(coinv_i)
        if first * second != full.order:
            raise AssertionError("coinvariant factorization fails: %s * %s != %s"
                                 % (first, second, full.order))
        checks += 1
    return checks


def _det3(m: Sequence[Sequence[int]]) -> int:
    return (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))


def suite_snf_oracle(rng: random.Random, n: int) -> int:
    """coinvariants_order against direct subgroup enumeration in (Z/D)^3."""
    checks = 0
    while checks < n:
        f = [[rng.randint(-4, 4) for _ in range(3)] for _ in range(3)]
        fm1 = [[f[i][j] - (i == j) for j in range(3)] for i in range(3)]
        d = abs(_det3(fm1))
        if not (0 < d <= 50):
            continue
        gens = [tuple(fm1[i][j] % d for i in range(3)) for j in range(3)]
        subgroup = {(0, 0, 0)}
        frontier = [(0, 0, 0)]
        while frontier:
            x = frontier.pop()
            for gvec in gens:
                y = tuple((a + b) % d for a, b in zip(x, gvec))
                if y not in subgroup:
                    subgroup.add(y)
                    frontier.append(y)
        oracle = d ** 3 // len(subgroup)
        got = coinvariants_order(f)
        if got != oracle:
            raise AssertionError("coinvariants oracle fails on %s: %s != %s"
                                 % (f, got, oracle))
        checks += 1
    return checks


# -- index-ratio law (finite abelian models) -------------------------------------


def _span(base: Tuple[int, int], gens: Sequence[Tuple[int, int]]) -> FrozenSet[Tuple[int, int]]:
    m, n = base
    out = {(0, 0)}
    frontier = [(0, 0)]
    while frontier:
        x = frontier.pop()
        for g in gens:
            y = ((x[0] + g[0]) % m, (x[1] + g[1]) % n)
            if y not in out:
                out.add(y)
                frontier.append(y)
    return frozenset(out)


def suite_index_ratio(rng: random.Random, n: int) -> int:
    """[MH : NH] = [M : N] / [M n H : N n H] by direct coset counting on
    Z/m x Z/n."""
    checks = 0
    while checks < n:
        m = rng.randint(2, 12)
        nn = rng.randint(2, 12)
        base = (m, nn)
        rand_elem = lambda: (rng.randrange(m), rng.randrange(nn))
        h = _span(base, [rand_elem() for _ in range(rng.randint(1, 2))])
        mm = _span(base, [rand_elem() for _ in range(rng.randint(1, 2))])
        sub_n = _span(base, [rng.choice(sorted(mm)) for _ in range(rng.randint(1, 2))])
        mh = _span(base, sorted(mm | h))
        nh = _span(base, sorted(sub_n | h))
        lhs = len(mh) // len(nh)
        rhs_num = len(mm) // len(sub_n)
        rhs_den = len(mm & h) // len(sub_n & h)
        if lhs * rhs_den != rhs_num:
            raise AssertionError("index-ratio law fails on %s" % (base,))
        checks += 1
    return checks


def suite_conductors() -> int:
    """The general induction formula specializes to the tame shortcut for
    every tame (e, f) up to 6 and depth in (1/e)Z up to 4."""
    checks = 0
    for e in range(1, 7):
        for f in range(1, 7):
            degree = e * f
            ext = FieldInvariants(degree=degree, e=e, f=f, disc_valuation=degree - f)
            for k in range(0, 4 * e + 1):
                depth = Fraction(k, e)
                lhs = conductor_tame_induction(ext, CharDescriptor(True, depth))
                rhs = conductor_induction_general(degree - f, f, 1, 1 + e * depth)
                if lhs != rhs:
                    raise AssertionError("conductor mismatch at e=%d f=%d depth=%s"
                                         % (e, f, depth))
                checks += 1
    return checks


# -- end-to-end scenario suites ---------------------------------------------------


def suite_scenarios(rng: random.Random, n: int) -> int:
    checks = 0
    for _ in range(n):
        scen = generate_scenario(rng)
        report = run_compare(scen)
        if report.verdict == VERDICT_UNEQUAL:
            raise AssertionError("UNEQUAL verdict on generated scenario %s" % scen.name)
        checks += 1
    return checks


def suite_chi(rng: random.Random, n: int) -> int:
    checks = 0
    guard = 0
    while checks < n:
        guard += 1
        if guard > 50 * (n + 1):
            raise AssertionError("chi suite failed to draw enough instances")
        scen = generate_scenario(rng)
        chi = scen.chi if scen.chi is not None else _random_chi(rng, scen.datum, scen.frame)
        if chi is None:
            continue
        subgroups = scen.frame.group.all_subgroups()
        sub = rng.choice(subgroups)
        try:
            report = verify_base_change(chi, sub, scen.datum, scen.frame)
        except ValueError:
            continue  # subgroup quotient not cyclic in this frame
        if not report.ok:
            raise AssertionError("base change fails on %s at H=%s: w=%s %s != %s"
                                 % (scen.name, sorted(sub), report.witness,
                                    report.lhs, report.rhs))
        checks += 1
    return checks
