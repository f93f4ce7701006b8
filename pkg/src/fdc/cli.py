"""Command-line entry point.

Subcommands:
  verify     run the two-sided comparison on scenario files
  degree     automorphic side only
  gamma      Galois side only
  chi-check  base-change verification of bundled character data
  selftest   randomized property suites

Global options: --q overrides the residue size, --format selects text or
json output, --strict makes FLAGGED count as failure.  Exit code 0 means
every comparison came back EQUAL (or FLAGGED without --strict), 1 means
an UNEQUAL verdict or a failed check, 2 a usage or validation error.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from fractions import Fraction
from typing import List, Optional

from .compare import VERDICT_FLAGGED, VERDICT_UNEQUAL, emit_report, run_compare
from .chi_data import verify_base_change
from .formal_degree import general_degree, regular_degree
from .qexact import PrimePower
from .scenario import Scenario, ScenarioError, fraction_str, load_scenario
from .weil_gamma import galois_side

DEFAULT_SEED = 20260809


def _parse_q(text: str) -> PrimePower:
    if "^" in text:
        p, a = text.split("^")
        return PrimePower(int(p), int(a))
    return PrimePower.from_q(int(text))


def _load(path: str, qq: Optional[PrimePower]) -> Scenario:
    scen = load_scenario(path)
    if qq is not None:
        scen = scen.with_q(qq)
    return scen


def _cmd_verify(args: argparse.Namespace) -> int:
    qq = _parse_q(args.q) if args.q else None
    reports = []
    for path in args.files:
        try:
            scen = _load(path, qq)
        except ScenarioError as e:
            print("error: %s: %s" % (path, e), file=sys.stderr)
            return 2
        reports.append(run_compare(scen))
    sys.stdout.write(emit_report(reports, args.format, with_timing=args.timing))
    if any(r.verdict == VERDICT_UNEQUAL for r in reports):
        return 1
    if args.strict and any(r.verdict == VERDICT_FLAGGED for r in reports):
        return 1
    return 0


def _cmd_degree(args: argparse.Namespace) -> int:
    qq = _parse_q(args.q) if args.q else None
    try:
        scen = _load(args.file, qq)
    except ScenarioError as e:
        print("error: %s" % e, file=sys.stderr)
        return 2
    shape = scen.shape()
    torus = scen.torus()
    if scen.depth_zero.regular:
        reg = regular_degree(shape, scen.datum, scen.frame, torus)
        payload = {
            "name": scen.name,
            "q": scen.pp.q,
            "monomial": {"coeff": reg.monomial.as_pair()[0],
                         "pexp": reg.monomial.as_pair()[1]},
            "prefactor_special_fiber": fraction_str(Fraction(1, reg.special_fiber_order)),
            "prefactor_full_index": fraction_str(Fraction(1, reg.full_point_index)),
            "prefactor_discrepancy": reg.discrepancy,
        }
        text = ["scenario %s  q=%d" % (scen.name, scen.pp.q),
                "  degree (special-fiber prefactor): %s / %d"
                % (reg.monomial, reg.special_fiber_order),
                "  degree (full-index prefactor):    %s / %d"
                % (reg.monomial, reg.full_point_index)]
    else:
        dim_quot = shape.depth_zero_quotient_dim(torus.rank_m)
        mono, pref = general_degree(shape, scen.depth_zero, dim_quot, dim_quot)
        payload = {
            "name": scen.name,
            "q": scen.pp.q,
            "monomial": {"coeff": mono.as_pair()[0], "pexp": mono.as_pair()[1]},
            "prefactor": fraction_str(pref),
        }
        text = ["scenario %s  q=%d" % (scen.name, scen.pp.q),
                "  degree: %s * %s" % (pref, mono)]
    if args.format == "json":
        sys.stdout.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write("\n".join(text) + "\n")
    return 0


def _cmd_gamma(args: argparse.Namespace) -> int:
    qq = _parse_q(args.q) if args.q else None
    try:
        scen = _load(args.file, qq)
    except ScenarioError as e:
        print("error: %s" % e, file=sys.stderr)
        return 2
    gal = galois_side(scen.datum, scen.frame, scen.filtration, scen.orbits)
    payload = {
        "name": scen.name,
        "q": scen.pp.q,
        "monomial": {"coeff": gal.monomial.as_pair()[0],
                     "pexp": gal.monomial.as_pair()[1]},
        "prefactor": fraction_str(gal.prefactor),
        "component_group_order": gal.component_order,
        "toral": {"monomial_pexp": gal.toral.monomial.as_pair()[1],
                  "rational": fraction_str(gal.toral.rational)},
        "root": {"monomial_pexp": gal.root.monomial.as_pair()[1],
                 "orbit_conductors": {oid: fraction_str(c)
                                      for oid, c in gal.root.orbit_conductors}},
    }
    if args.format == "json":
        sys.stdout.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write("scenario %s  q=%d\n  gamma value: %s * %s\n"
                         % (scen.name, scen.pp.q, gal.prefactor, gal.monomial))
    return 0


def _cmd_chi_check(args: argparse.Namespace) -> int:
    qq = _parse_q(args.q) if args.q else None
    try:
        scen = _load(args.file, qq)
    except ScenarioError as e:
        print("error: %s" % e, file=sys.stderr)
        return 2
    if scen.chi is None:
        print("error: scenario %s bundles no character data" % scen.name, file=sys.stderr)
        return 2
    results = []
    ok_all = True
    for sub in scen.frame.group.all_subgroups():
        try:
            rep = verify_base_change(scen.chi, sub, scen.datum, scen.frame)
        except ValueError as e:
            results.append({"subgroup": sorted(sub), "skipped": str(e)})
            continue
        ok_all = ok_all and rep.ok
        entry = {"subgroup": sorted(sub), "ok": rep.ok}
        if not rep.ok:
            entry["witness"] = rep.witness
        results.append(entry)
    if args.format == "json":
        sys.stdout.write(json.dumps({"name": scen.name, "ok": ok_all,
                                     "subgroups": results},
                                    indent=2, sort_keys=True) + "\n")
    else:
        for entry in results:
            if "skipped" in entry:
                sys.stdout.write("  H=%s skipped (%s)\n"
                                 % (entry["subgroup"], entry["skipped"]))
            else:
                sys.stdout.write("  H=%s %s\n" % (entry["subgroup"],
                                                  "ok" if entry["ok"] else "FAIL"))
        sys.stdout.write("chi-check %s: %s\n" % (scen.name, "ok" if ok_all else "FAIL"))
    return 0 if ok_all else 1


def _cmd_selftest(args: argparse.Namespace) -> int:
    seed = args.seed
    if seed is None:
        env = os.environ.get("FDC_SEED")
        seed = int(env) if env else DEFAULT_SEED
    rng = random.Random(seed)
    n = args.n
    failures = 0

    from . import selftest as st

    suites = [
        ("master-length-identity", lambda: st.suite_master_identity(rng, n)),
        ("periodic-sum", lambda: st.suite_periodic_sum(rng, n)),
        ("lattice-coinvariant-factorization", lambda: st.suite_lattice_identity(rng, max(1, n // 2))),
        ("snf-coinvariants-oracle", lambda: st.suite_snf_oracle(rng, max(1, n // 2))),
        ("index-ratio", lambda: st.suite_index_ratio(rng, n)),
        ("conductor-consistency", lambda: st.suite_conductors()),
        ("scenario-comparisons", lambda: st.suite_scenarios(rng, max(1, n // 5))),
        ("chi-base-change", lambda: st.suite_chi(rng, max(1, n // 10))),
    ]
    for label, fn in suites:
        try:
            count = fn()
        except Exception as e:  # noqa: BLE001 - report and count, don't crash
            print("selftest %-36s FAIL (%s)" % (label, e))
            failures += 1
            continue
        print("selftest %-36s ok (%d checks)" % (label, count))
    return 1 if failures else 0


def main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="fdc",
        description="Exact two-sided verification of formal-degree identities "
                    "on tame elliptic scenario data.")
    parser.add_argument("--q", help="override the residue size (an odd prime power, "
                                    "e.g. 9 or 3^2)")
    parser.add_argument("--format", choices=("text", "json"), default="text")
    parser.add_argument("--strict", action="store_true",
                        help="treat FLAGGED verdicts as failures")
    parser.add_argument("--timing", action="store_true",
                        help="include wall times in output")
    sub = parser.add_subparsers(dest="command", required=True)

    p_verify = sub.add_parser("verify", help="two-sided comparison")
    p_verify.add_argument("files", nargs="+")
    p_verify.set_defaults(func=_cmd_verify)

    p_degree = sub.add_parser("degree", help="automorphic side only")
    p_degree.add_argument("file")
    p_degree.set_defaults(func=_cmd_degree)

    p_gamma = sub.add_parser("gamma", help="Galois side only")
    p_gamma.add_argument("file")
    p_gamma.set_defaults(func=_cmd_gamma)

    p_chi = sub.add_parser("chi-check", help="character base-change verification")
    p_chi.add_argument("file")
    p_chi.set_defaults(func=_cmd_chi_check)

    p_self = sub.add_parser("selftest", help="randomized property suites")
    p_self.add_argument("--n", type=int, default=200)
    p_self.add_argument("--seed", type=int, default=None,
                        help="overrides FDC_SEED and the built-in default")
    p_self.set_defaults(func=_cmd_selftest)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as e:
        print("error: %s" % e, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
