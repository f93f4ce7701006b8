"""Two-sided comparison of a scenario and report emission.

For each scenario both pipelines run from scratch: the automorphic degree
in its two prefactor normalizations, and the assembled adjoint gamma value
divided by the component-group order.  The verdict compares the full-index
normalization against the Galois value; when they agree but the printed
special-fiber normalization differs (their ratio is the Kottwitz-style
index), the verdict is FLAGGED rather than EQUAL, with the discrepancy
factor recorded.

Independently of the headline numbers, every run re-derives the bridging
lattice identities on the cocharacter lattice: the full point index as the
product of the Kottwitz fixed count with the twisted fixed count, and the
coinvariant factorization that makes the two sides match.  A failure of
either is an internal error, not a verdict.

Reports are deterministic: the machine-readable form contains no wall
times (they are available in the text form on request), so identical
inputs produce byte-identical documents.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Sequence

from .formal_degree import (
    RegularDegree,
    general_degree,
    heisenberg_dims,
    heisenberg_indices,
    regular_as_opaque,
    regular_degree,
    volume_exponent_closed,
    volume_exponent_raw,
)
from .galois_roots import validate_depth_lattice
from .qexact import QMonomial, exp_q
from .scenario import Scenario, fraction_str
from .weil_gamma import GaloisSide, galois_side
from .zlattice import (
    coinvariants_order,
    dual_action,
    invariant_sublattice,
    restrict_endomorphism,
)

VERDICT_EQUAL = "EQUAL"
VERDICT_FLAGGED = "FLAGGED"
VERDICT_UNEQUAL = "UNEQUAL"


def _value_monomial(prefactor: Fraction, monomial: QMonomial) -> QMonomial:
    return monomial.scale(prefactor)


def _mono_dict(m: QMonomial) -> Dict[str, str]:
    coeff, pexp = m.as_pair()
    out = {"coeff": coeff, "pexp": pexp, "p": str(m.pp.p)}
    if m.pexp.denominator == 1:
        out["rational"] = fraction_str(m.rational_value())
    return out


@dataclass
class ComparisonReport:
    name: str
    q: int
    verdict: str
    automorphic_monomial: QMonomial
    prefactor_special_fiber: Fraction
    prefactor_full_index: Fraction
    prefactor_discrepancy: int
    galois_monomial: QMonomial
    galois_prefactor: Fraction
    intermediates: Dict[str, object]
    diagnostics: List[str]
    elapsed_s: float

    def value_automorphic(self) -> QMonomial:
        return _value_monomial(self.prefactor_full_index, self.automorphic_monomial)

    def value_galois(self) -> QMonomial:
        return _value_monomial(self.galois_prefactor, self.galois_monomial)

    def to_json_dict(self, with_timing: bool = False) -> Dict[str, object]:
        doc: Dict[str, object] = {
            "name": self.name,
            "q": self.q,
            "verdict": self.verdict,
            "automorphic": {
                "monomial": _mono_dict(self.automorphic_monomial),
                "prefactor_special_fiber": fraction_str(self.prefactor_special_fiber),
                "prefactor_full_index": fraction_str(self.prefactor_full_index),
                "prefactor_discrepancy": self.prefactor_discrepancy,
                "value_full_index": _mono_dict(self.value_automorphic()),
            },
            "galois": {
                "monomial": _mono_dict(self.galois_monomial),
                "prefactor": fraction_str(self.galois_prefactor),
                "value": _mono_dict(self.value_galois()),
            },
            "intermediates": self.intermediates,
            "diagnostics": list(self.diagnostics),
        }
        if with_timing:
            doc["elapsed_s"] = round(self.elapsed_s, 6)
        return doc


def run_compare(scenario: Scenario) -> ComparisonReport:
    """Evaluate both sides exactly and compare.

    Raises on internal-consistency failures (bridging identities, dual
    assemblies); disagreement of the two sides is a verdict, not an error.
    """
    t0 = time.monotonic()
    shape = scenario.shape()
    torus = scenario.torus()
    reg: RegularDegree = regular_degree(shape, scenario.datum, scenario.frame, torus)
    gal: GaloisSide = galois_side(scenario.datum, scenario.frame,
                                  scenario.filtration, scenario.orbits, torus)

    diagnostics: List[str] = []

    # Bridging identity: full index = Kottwitz fixed count * twisted count.
    if torus.full_point_index != torus.kottwitz_fixed_order * torus.special_fiber_order:
        raise AssertionError("point-index factorization failed")

    # Coinvariant factorization on the cocharacter lattice, all three orders
    # computed by independent routes.
    dual_gens = [dual_action(scenario.datum.action[a]) for a in sorted(scenario.frame.inertia)]
    dual_frob = dual_action(scenario.datum.action[scenario.frame.frobenius])
    basis = invariant_sublattice(scenario.datum.rank, dual_gens)
    if basis:
        f_on_inv = restrict_endomorphism(dual_frob, basis)
    else:
        f_on_inv = []
    inv_coinv = coinvariants_order(f_on_inv)
    if inv_coinv * torus.kottwitz_fixed_order != torus.cochar_full_coinvariants:
        raise AssertionError(
            "coinvariant factorization failed: %s * %s != %s"
            % (inv_coinv, torus.kottwitz_fixed_order, torus.cochar_full_coinvariants))
    if inv_coinv != torus.m_frob_coinvariants:
        raise AssertionError("character/cocharacter coinvariant orders disagree")

    # Volume normalization: raw torsor enumeration against the closed form.
    raw = volume_exponent_raw(shape, torus.rank_m)
    closed = volume_exponent_closed(shape, torus.rank_m)
    if raw != closed:
        raise AssertionError("volume exponent mismatch: raw %s vs closed %s" % (raw, closed))

    # Cross-check the general formula against the regular route.  The
    # finite-group route needs an even root count in the depth-zero
    # quotient; a symmetric odd-degree orbit jumping at 0 (legal scenario
    # data, but matching no actual reductive quotient) makes it odd, in
    # which case the check is inapplicable and noted.
    dim_quot = shape.depth_zero_quotient_dim(torus.rank_m)
    if (dim_quot - torus.rank_m) % 2 == 0:
        dz, dim_quot = regular_as_opaque(shape, torus)
        mono_g, pref_g = general_degree(shape, dz, dim_quot, dim_quot)
        if mono_g.scale(pref_g) != reg.monomial.scale(Fraction(1, reg.special_fiber_order)):
            raise AssertionError("general and regular degree routes disagree")
    else:
        diagnostics.append("depth-zero quotient has an odd root count; "
                           "finite-group cross-check not applicable")

    pref_special = Fraction(1, reg.special_fiber_order)
    pref_full = Fraction(1, reg.full_point_index)
    value_aut = reg.monomial.scale(pref_full)
    value_gal = gal.monomial.scale(gal.prefactor)
    if value_aut != value_gal:
        verdict = VERDICT_UNEQUAL
    elif reg.discrepancy != 1:
        verdict = VERDICT_FLAGGED
        diagnostics.append(
            "prefactor normalizations differ by the Kottwitz index %d: "
            "special-fiber form 1/%d, full-index form 1/%d"
            % (reg.discrepancy, reg.special_fiber_order, reg.full_point_index))
    else:
        verdict = VERDICT_EQUAL

    for c in validate_depth_lattice(scenario.filtration, scenario.orbits):
        diagnostics.append("depth-lattice at %s: break %s, value-group %s, half-lattice %s"
                           % (c.orbit_id, c.break_value, c.in_value_group,
                              c.in_half_value_group))
    for flag in scenario.unverified_assumptions:
        diagnostics.append("unverified: %s" % flag)

    hdims = heisenberg_dims(shape)
    hidx = heisenberg_indices(shape)
    intermediates: Dict[str, object] = {
        "rank_m": torus.rank_m,
        "special_fiber_order": torus.special_fiber_order,
        "kottwitz_fixed_order": torus.kottwitz_fixed_order,
        "full_point_index": torus.full_point_index,
        "m_frob_coinvariants": torus.m_frob_coinvariants,
        "component_group_order": gal.component_order,
        "heisenberg_indices": [_mono_dict(m) for m in hidx],
        "heisenberg_dims": [_mono_dict(m) for m in hdims],
        "volume_exponent": fraction_str(raw),
        "toral_gamma": {
            "monomial": _mono_dict(gal.toral.monomial),
            "rational": fraction_str(gal.toral.rational),
            "l0_inverse": gal.toral.l0_inverse,
            "l1_inverse": _mono_dict(
                exp_q(-torus.rank_m, scenario.pp).scale(gal.toral.l1_inverse_twisted)),
        },
        "root_gamma": {
            "monomial": _mono_dict(gal.root.monomial),
            "orbit_conductors": {oid: fraction_str(c)
                                 for oid, c in gal.root.orbit_conductors},
        },
    }
    return ComparisonReport(
        name=scenario.name,
        q=scenario.pp.q,
        verdict=verdict,
        automorphic_monomial=reg.monomial,
        prefactor_special_fiber=pref_special,
        prefactor_full_index=pref_full,
        prefactor_discrepancy=reg.discrepancy,
        galois_monomial=gal.monomial,
        galois_prefactor=gal.prefactor,
        intermediates=intermediates,
        diagnostics=diagnostics,
        elapsed_s=time.monotonic() - t0,
    )


def emit_report(reports: Sequence[ComparisonReport], fmt: str = "text",
                with_timing: bool = False) -> str:
    """Deterministic rendering; the json form round-trips exact values as
    strings and omits timing unless asked."""
    if fmt == "json":
        doc = {
            "reports": [r.to_json_dict(with_timing=with_timing) for r in reports],
            "summary": {
                "total": len(reports),
                "equal": sum(r.verdict == VERDICT_EQUAL for r in reports),
                "flagged": sum(r.verdict == VERDICT_FLAGGED for r in reports),
                "unequal": sum(r.verdict == VERDICT_UNEQUAL for r in reports),
            },
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if fmt != "text":
        raise ValueError("unknown format %r" % fmt)
    lines: List[str] = []
    for r in reports:
        lines.append("scenario %-28s q=%-4d verdict=%s" % (r.name, r.q, r.verdict))
        va, vg = r.value_automorphic(), r.value_galois()
        lines.append("  automorphic  %s  (monomial %s, prefactors 1/%d | 1/%d)"
                     % (va, r.automorphic_monomial,
                        int(1 / r.prefactor_special_fiber),
                        int(1 / r.prefactor_full_index)))
        lines.append("  galois       %s  (monomial %s, prefactor %s)"
                     % (vg, r.galois_monomial, r.galois_prefactor))
        if r.prefactor_discrepancy != 1:
            lines.append("  note: prefactor normalizations differ by %d"
                         % r.prefactor_discrepancy)
        if with_timing:
            lines.append("  elapsed %.4f s" % r.elapsed_s)
    eq = sum(r.verdict == VERDICT_EQUAL for r in reports)
    fl = sum(r.verdict == VERDICT_FLAGGED for r in reports)
    un = sum(r.verdict == VERDICT_UNEQUAL for r in reports)
    lines.append("summary: %d scenario(s), %d EQUAL, %d FLAGGED, %d UNEQUAL"
                 % (len(reports), eq, fl, un))
    return "\n".join(lines) + "\n"
