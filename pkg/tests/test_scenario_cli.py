import json
import os
import random
from fractions import Fraction

import pytest

import fdc.cli as cli
from fdc.compare import emit_report, run_compare
from fdc.qexact import PrimePower
from fdc.scenario import (
    ScenarioError,
    generate_scenario,
    load_scenario,
    parse_fraction,
    scenario_from_dict,
)

SCEN_DIR = os.path.join(os.path.dirname(__file__), "..", "src", "fdc", "scenarios")

BUNDLED = [
    "sl2_unramified_depth0",
    "sl2_ramified_depth_half",
    "z4_a1_ramified_chi",
    "s3_a2_depth_third",
    "z4_rank3_mixed",
    "d4_b2_depth_quarter",
]


def bundled_path(name):
    return os.path.join(SCEN_DIR, name + ".json")


def bundled_doc(name):
    with open(bundled_path(name)) as fh:
        return json.load(fh)


def test_parse_fraction():
    assert parse_fraction("3/4") == Fraction(3, 4)
    assert parse_fraction("-2") == -2
    with pytest.raises(ValueError):
        parse_fraction("1/0")
    with pytest.raises(ValueError):
        parse_fraction("a/b")


def test_load_bundled():
    for name in BUNDLED:
        scen = load_scenario(bundled_path(name))
        assert scen.name == name
        assert scen.filtration is not None


def test_ellipticity_failure_names_datum():
    doc = bundled_doc("sl2_unramified_depth0")
    doc["action"]["1"] = [[1]]  # trivialize the action: no longer elliptic
    with pytest.raises(ScenarioError) as err:
        scenario_from_dict(doc)
    assert any(mod == "galois_roots" and "elliptic" in msg
               for mod, fieldname, msg in err.value.failures)


def test_malformed_rational_is_parse_error():
    doc = bundled_doc("sl2_unramified_depth0")
    doc["jump_offsets"]["-2"] = "1/0"
    with pytest.raises(ScenarioError) as err:
        scenario_from_dict(doc)
    assert any("1/0" in msg or "denominator" in msg
               for _m, _f, msg in err.value.failures)


def test_depth_lattice_violation_refused():
    doc = bundled_doc("sl2_unramified_depth0")
    doc["theta_depths"]["-2"] = "1/2"   # e = 1 here: 1/2 violates the lattice
    doc["theta_total_depth"] = "1/2"
    with pytest.raises(ScenarioError) as err:
        scenario_from_dict(doc)
    assert any("depth lattice" in msg for _m, _f, msg in err.value.failures)


def test_bad_chi_reported():
    doc = bundled_doc("z4_a1_ramified_chi")
    doc["chi"]["1"]["2"] = "0"  # break negation-inversion against the other root
    with pytest.raises(ScenarioError) as err:
        scenario_from_dict(doc)
    assert any(mod == "chi_data" for mod, _f, _msg in err.value.failures)


def test_round_trip_all_bundled():
    for name in BUNDLED:
        scen = load_scenario(bundled_path(name))
        doc = scen.to_json_dict()
        again = scenario_from_dict(doc)
        assert again.to_json_dict() == doc
        # loaded scenarios compare identically after the round trip
        assert run_compare(again).to_json_dict() == run_compare(scen).to_json_dict()


def test_report_determinism():
    scen = load_scenario(bundled_path("z4_rank3_mixed"))
    r1 = emit_report([run_compare(scen)], "json")
    r2 = emit_report([run_compare(scen)], "json")
    assert r1 == r2  # byte identical (no timing in the machine form)
    doc = json.loads(r1)
    assert doc["reports"][0]["verdict"] == "FLAGGED"
    assert doc["summary"] == {"total": 1, "equal": 0, "flagged": 1, "unequal": 0}


def test_empty_batch_report():
    assert "0 scenario(s)" in emit_report([], "text")
    doc = json.loads(emit_report([], "json"))
    assert doc["reports"] == [] and doc["summary"]["total"] == 0
    with pytest.raises(ValueError):
        emit_report([], "yaml")


def test_with_q_override():
    scen = load_scenario(bundled_path("sl2_unramified_depth0"))
    for q in (3, 5, 7, 9):
        rep = run_compare(scen.with_q(PrimePower.from_q(q)))
        assert rep.verdict == "EQUAL"
        assert rep.value_galois().rational_value() == Fraction(q * q, q + 1)


def test_cli_verify_exit_codes(capsys):
    rc = cli.main(["verify", bundled_path("sl2_unramified_depth0")])
    assert rc == 0
    out = capsys.readouterr().out
    assert "EQUAL" in out

    rc = cli.main(["--strict", "verify", bundled_path("sl2_ramified_depth_half")])
    assert rc == 1  # FLAGGED counts as failure under --strict
    rc = cli.main(["verify", bundled_path("sl2_ramified_depth_half")])
    assert rc == 0

    rc = cli.main(["verify", "/nonexistent/file.json"])
    assert rc == 2


def test_cli_verify_json_q_override(capsys):
    rc = cli.main(["--q", "9", "--format", "json", "verify",
                   bundled_path("sl2_unramified_depth0")])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["reports"][0]["q"] == 9
    assert doc["reports"][0]["galois"]["value"]["rational"] == "81/10"


def test_cli_degree_gamma(capsys):
    rc = cli.main(["--format", "json", "degree", bundled_path("z4_rank3_mixed")])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["prefactor_discrepancy"] == 2
    rc = cli.main(["--format", "json", "gamma", bundled_path("z4_rank3_mixed")])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["monomial"]["pexp"] == "9"


def test_cli_degree_opaque(capsys, tmp_path):
    doc = bundled_doc("sl2_unramified_depth0")
    doc["depth_zero"] = {"dim_rho": "2", "stab_index": 24}
    path = tmp_path / "opaque.json"
    path.write_text(json.dumps(doc))
    rc = cli.main(["--format", "json", "degree", str(path)])
    assert rc == 0
    out = json.loads(capsys.readouterr().out)
    assert out["prefactor"] == "1/12"


def test_cli_chi_check(capsys):
    rc = cli.main(["chi-check", bundled_path("z4_a1_ramified_chi")])
    assert rc == 0
    assert "ok" in capsys.readouterr().out
    rc = cli.main(["chi-check", bundled_path("sl2_ramified_depth_half")])
    assert rc == 2  # no chi bundled


def test_cli_selftest_small(capsys):
    rc = cli.main(["selftest", "--n", "10", "--seed", "3"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "master-length-identity" in out and "FAIL" not in out


def test_generator_produces_valid_scenarios():
    rng = random.Random(2024)
    for _ in range(25):
        scen = generate_scenario(rng)
        # regeneration through serialization preserves everything
        again = scenario_from_dict(scen.to_json_dict())
        assert again.filtration == scen.filtration
        assert len(scen.datum.roots) <= 12 and scen.datum.rank <= 3
        assert scen.frame.group.order <= 8
        assert all(o.e <= 4 for o in scen.orbits)
