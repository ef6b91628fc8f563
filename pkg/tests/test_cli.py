import json
import shutil

import pytest

from delpezzo import checks
from delpezzo.cli import (
    EXIT_CHECK_FAILED,
    EXIT_MALFORMED,
    EXIT_OK,
    EXIT_OUT_OF_RANGE,
    EXIT_SINGULAR,
    FIXTURES,
    MalformedInput,
    fixture_path,
    load_fixture,
    main,
    minimal_count_profiles,
    parse_surface,
    run_scan,
    sample_forms,
    surface_to_doc,
    weyl_table,
)


def write(tmp_path, doc, name="s.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc) if not isinstance(doc, str) else doc)
    return str(path)


def fixture_doc(name):
    return json.loads(fixture_path(name).read_text())


# -- surface files --------------------------------------------------------------


@pytest.mark.parametrize("name", FIXTURES)
def test_fixture_round_trip(name):
    S = load_fixture(name)
    assert S.name == name
    assert parse_surface(surface_to_doc(S)) == S


MALFORMED = [
    ({"kind": "quartic", "p": 2, "coeffs": []}, "kind"),
    ({"kind": "cubic", "p": 4, "coeffs": []}, "prime"),
    ({"kind": "cubic", "p": 2, "r": 0, "coeffs": []}, "positive"),
    ({"kind": "cubic", "p": 2, "r": 2, "coeffs": []}, "gen_poly"),
    ({"kind": "cubic", "p": 2, "r": 2, "gen_poly": [1, 0, 1], "coeffs": [{"exps": [3, 0, 0, 0], "value": [1]}]}, "irreducible"),
    ({"kind": "cubic", "p": 2, "gen_poly": [1, 1], "coeffs": [{"exps": [3, 0, 0, 0], "value": [1]}]}, "omitted"),
    ({"kind": "cubic", "p": 2, "coeffs": [{"exps": [3, 0, 0, 0], "value": [1]}, {"exps": [1, 1, 0], "value": [1]}]}, "coeffs[1]"),
    ({"kind": "cubic", "p": 2, "coeffs": [{"exps": [3, 0, 0, 0], "value": [1]}, {"exps": [3, 0, 0, 0], "value": [1]}]}, "repeats"),
    ({"kind": "cubic", "p": 3, "coeffs": [{"exps": [3, 0, 0, 0], "value": [3]}]}, "reduced"),
    ({"kind": "cubic", "p": 3, "coeffs": [{"exps": [3, 0, 0, 0], "value": [1, 1]}]}, "more than r"),
    ({"kind": "cubic", "p": 3, "coeffs": [{"exps": [3, 0, 0, 0]}]}, "keys"),
    ({"kind": "cubic", "p": 3, "coeffs": [{"exps": [3, 0, 0, 0], "value": [0]}]}, "zero"),
    ({"kind": "cubic", "p": 3, "coeffs": {"a": 1}}, "list"),
    ({"kind": "cubic", "p": 3, "extra": 1, "coeffs": []}, "unknown"),
    ({"kind": "dp4", "p": 3, "coeffs": [[{"exps": [2, 0, 0, 0, 0], "value": [1]}]]}, "2 record lists"),
    ({"kind": "dp4", "p": 3, "coeffs": [[{"exps": [2, 0, 0, 0, 0], "value": [1]}], [{"exps": [2, 0, 0, 0, 0], "value": [2]}]]}, "dependent"),
    ([1, 2], "object"),
]


@pytest.mark.parametrize("doc,fragment", MALFORMED)
def test_parse_rejects(doc, fragment):
    with pytest.raises(MalformedInput, match=None) as info:
        parse_surface(doc)
    assert fragment in str(info.value)


@pytest.mark.parametrize("doc,fragment", MALFORMED[:8])
def test_analyze_malformed_exit_code(tmp_path, capsys, doc, fragment):
    assert main(["analyze", write(tmp_path, doc)]) == EXIT_MALFORMED
    assert fragment in capsys.readouterr().err


def test_malformed_reports_record_index(tmp_path, capsys):
    doc = fixture_doc("eq2")
    doc["coeffs"][1]["exps"] = [1, 1, 0]
    assert main(["analyze", write(tmp_path, doc)]) == EXIT_MALFORMED
    err = capsys.readouterr().err
    assert "coeffs[1]" in err and "[1, 1, 0]" in err


def test_not_json_and_missing_file(tmp_path, capsys):
    assert main(["analyze", write(tmp_path, "{not json")]) == EXIT_MALFORMED
    assert main(["analyze", str(tmp_path / "absent.json")]) == EXIT_MALFORMED
    err = capsys.readouterr().err
    assert "not valid JSON" in err


def test_singular_exit_code(tmp_path, capsys):
    # a cone over a plane cubic: singular at (0 : 0 : 0 : 1)
    doc = {"kind": "cubic", "p": 2, "coeffs": [
        {"exps": [3, 0, 0, 0], "value": [1]}, {"exps": [0, 3, 0, 0], "value": [1]}, {"exps": [0, 0, 3, 0], "value": [1]}]}
    assert main(["analyze", write(tmp_path, doc)]) == EXIT_SINGULAR
    assert "singular" in capsys.readouterr().err


def test_singular_dp4_exit_code(tmp_path):
    doc = {"kind": "dp4", "p": 3, "coeffs": [
        [{"exps": [2, 0, 0, 0, 0], "value": [1]}, {"exps": [0, 2, 0, 0, 0], "value": [1]}, {"exps": [0, 0, 2, 0, 0], "value": [2]}],
        [{"exps": [1, 1, 0, 0, 0], "value": [1]}, {"exps": [0, 0, 0, 2, 0], "value": [1]}]]}
    assert main(["analyze", write(tmp_path, doc)]) == EXIT_SINGULAR


def test_out_of_range_exit_code(tmp_path, capsys):
    # eq2 needs F_64 for its lines
    path = write(tmp_path, fixture_doc("eq2"))
    assert main(["analyze", path, "--extension-cap", "32", "--skip-param"]) == EXIT_OUT_OF_RANGE
    assert "out of range" in capsys.readouterr().err


def test_scan_argument_errors(capsys):
    assert main(["scan", "--kind", "cubic", "--p", "4"]) == EXIT_MALFORMED
    assert main(["scan", "--kind", "cubic", "--p", "2", "--r", "14", "--extension-cap", "8192"]) == EXIT_OUT_OF_RANGE
    assert main(["scan", "--kind", "dp4", "--p", "2", "--minimal", "--count", "1"]) == EXIT_MALFORMED


# -- reports -------------------------------------------------------------------------


def test_analyze_json_is_reproducible(tmp_path):
    src = write(tmp_path, fixture_doc("eq2"))
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["analyze", src, "--skip-param", "--json", str(a)]) == EXIT_OK
    assert main(["analyze", src, "--skip-param", "--json", str(b)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    rep = json.loads(a.read_text())
    assert "timing" not in rep
    assert rep["schema_version"] == 1
    assert rep["point_counts"]["1"] == 3
    assert rep["lines"]["min_degree_counts"] == {"3": 15, "6": 12}
    assert rep["minimality"]["minimal"] is False
    assert rep["frobenius"]["trace"] == -1


def test_analyze_timing_flag(tmp_path):
    src = write(tmp_path, fixture_doc("eq2"))
    out = tmp_path / "t.json"
    assert main(["analyze", src, "--skip-param", "--timing", "--json", str(out)]) == EXIT_OK
    timing = json.loads(out.read_text())["timing"]
    assert {"smoothness", "lines", "points"} <= set(timing)


def test_analyze_eq1_summary_and_param(tmp_path, capsys):
    src = write(tmp_path, fixture_doc("eq1"))
    out = tmp_path / "eq1.json"
    assert main(["analyze", src, "--json", str(out)]) == EXIT_OK
    text = capsys.readouterr().out
    assert "points: k=1: 1, k=2: 9, k=3: 121" in text
    assert "Eckardt points: 13 (1 rational)" in text
    rep = json.loads(out.read_text())
    pm = rep["param"]
    assert pm["admissible_line_found"]
    assert pm["x"] == [1, 0, 0, 0]
    assert pm["indeterminacy"] == {**pm["indeterminacy"], "distinct_points": 3, "multiplicity_one": True}
    assert pm["fibers"]["parameter_pairs"] == 4225
    assert pm["fibers"]["geometric_modal_fiber_size"] == 6
    assert pm["phi_values_rational"]
    assert rep["exceptional_locus"]["2"] == {"on_lines": 1, "off_lines": 8}


def test_param_subcommand(tmp_path):
    src = write(tmp_path, fixture_doc("eq1"))
    out = tmp_path / "p.json"
    # F_4 is too small to interpolate the map
    assert main(["param", src, "--fiber-level", "1"]) == EXIT_OUT_OF_RANGE
    assert main(["param", src, "--fiber-level", "2", "--json", str(out)]) == EXIT_OK
    rep = json.loads(out.read_text())
    assert "point_counts" not in rep
    assert rep["param"]["fibers"]["field_size"] == 16
    alias = tmp_path / "a.json"
    assert main(["analyze", src, "--param-only", "--fiber-level", "2", "--json", str(alias)]) == EXIT_OK
    assert alias.read_bytes() == out.read_bytes()


def test_analyze_dp4(tmp_path, capsys):
    out = tmp_path / "d.json"
    assert main(["analyze", write(tmp_path, fixture_doc("dp4_f3")), "--json", str(out)]) == EXIT_OK
    rep = json.loads(out.read_text())
    assert rep["point_counts"]["1"] == 16
    assert rep["smoothness"]["lines_over_closure"] == 16
    assert rep["rational_points"]["case"] == "ii"
    assert rep["conic_bundles"] == {"meeting_pairs": 40, "singular_fiber_counts": {"4": 40}}
    assert "case (ii)" in capsys.readouterr().out


def test_weyl_table_command(tmp_path, capsys):
    out = tmp_path / "w.json"
    assert main(["weyl-table", "--json", str(out)]) == EXIT_OK
    text = capsys.readouterr().out
    assert "group order 51840, 25 classes" in text
    tab = json.loads(out.read_text())
    assert tab == json.loads(json.dumps(weyl_table()))
    assert len(tab["rows"]) == 25
    assert sum(r["size"] for r in tab["rows"]) == 51840


# -- scans --------------------------------------------------------------------------


def test_sample_forms_is_seeded():
    a = sample_forms("cubic", 3, 1, 10, 5)
    b = sample_forms("cubic", 3, 1, 10, 5)
    c = sample_forms("cubic", 3, 1, 10, 6)
    assert a == b
    assert a != c
    d = sample_forms("dp4", 2, 2, 5, 1)
    assert all(S is None or (S.q == 4 and S.r == 2) for S in d)


@pytest.mark.parametrize("kind,p", [("cubic", 2), ("dp4", 2)])
def test_scan_independent_of_worker_count(kind, p):
    one = run_scan(kind, p, 1, 16, 9, workers=1)
    two = run_scan(kind, p, 1, 16, 9, workers=2)
    assert one == two
    assert sum(one["status"].values()) == 16


def test_scan_command(tmp_path, capsys):
    out = tmp_path / "s.json"
    code = main(["scan", "--kind", "dp4", "--p", "2", "--count", "10", "--seed", "3", "--json", str(out)])
    rep = json.loads(out.read_text())
    assert code == (EXIT_CHECK_FAILED if rep["violations"] else EXIT_OK)
    assert rep["count"] == 10 and rep["seed"] == 3
    assert "scan dp4 over F_2" in capsys.readouterr().out


def test_minimal_count_profiles():
    # at q = 5 only the order-3 minimal class fits under the default cap
    assert minimal_count_profiles(5, 8192) == {(16, 576)}


def test_minimal_search_command(capsys):
    assert main(["scan", "--kind", "cubic", "--p", "5", "--count", "3000", "--seed", "42", "--minimal"]) == EXIT_OK
    text = capsys.readouterr().out
    assert "point count profiles: [[16, 576]]" in text


# -- certification harness ------------------------------------------------------------


def test_check_harness_detects_corrupted_fixture(tmp_path):
    for name in FIXTURES:
        shutil.copy(fixture_path(name), tmp_path / f"{name}.json")
    good = checks.run_criterion(1, checks.Fixtures(str(tmp_path)))
    assert all(c.passed for c in good)
    doc = fixture_doc("eq1")
    doc["coeffs"] = [rec for rec in doc["coeffs"] if rec["exps"] != [0, 3, 0, 0]] + [{"exps": [0, 3, 0, 0], "value": [0]}]
    doc["coeffs"].append({"exps": [0, 0, 1, 2], "value": [1]})
    (tmp_path / "eq1.json").write_text(json.dumps(doc))
    bad = checks.run_criterion(1, checks.Fixtures(str(tmp_path)))
    assert not all(c.passed for c in bad)


def test_check_harness_reports_errors(tmp_path):
    (tmp_path / "eq1.json").write_text("{}")
    res = checks.run_criterion(1, checks.Fixtures(str(tmp_path)))
    assert len(res) == 1 and not res[0].passed
    assert "MalformedInput" in res[0].computed


def test_paper_check_command(tmp_path, capsys, monkeypatch):
    def failing(fx):
        return [checks.Check(2, "deliberately wrong", 1, 0)]

    monkeypatch.setattr(checks, "CRITERIA", {1: checks.criterion_1})
    out = tmp_path / "c.json"
    assert main(["paper-check", "--json", str(out)]) == EXIT_OK
    assert "3 of 3 checks passed" in capsys.readouterr().out
    rep = json.loads(out.read_text())
    assert [c["passed"] for c in rep["checks"]] == [True] * 3

    monkeypatch.setattr(checks, "CRITERIA", {1: checks.criterion_1, 2: failing})
    assert main(["paper-check"]) == EXIT_CHECK_FAILED
    text = capsys.readouterr().out
    assert "deliberately wrong" in text and "3 of 4 checks passed" in text
