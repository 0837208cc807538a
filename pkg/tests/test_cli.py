import json

import pytest

from rdsym.cli import main


def run(capsys, *args):
    code = main(list(args))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_catalog_show_by_table_and_item(capsys):
    code, out, _ = run(capsys, "catalog", "show", "--table", "1", "--item", "2")
    assert code == 0 and "T1.2" in out and "f1 =" in out


def test_catalog_list_as_json(capsys):
    code, out, _ = run(capsys, "catalog", "list", "--format", "json")
    assert code == 0
    listing = json.loads(out)
    assert len(listing["entries"]) == 16 and len(listing["views"]) == 8


def test_unknown_flag_is_a_usage_error(capsys):
    code, _, _ = run(capsys, "verify", "--bogus")
    assert code == 2
    code, _, _ = run(capsys, "catalog", "show")
    assert code == 2


def test_verify_reports_are_byte_identical(tmp_path, capsys):
    paths = [tmp_path / "a.jsonl", tmp_path / "b.jsonl"]
    for p in paths:
        code, _, err = run(capsys, "verify", "--id", "T2.1", "--m", "1", "--samples", "1",
                           "--seed", "3", "--report", str(p))
        assert code == 0 and str(p) in err
    assert paths[0].read_bytes() == paths[1].read_bytes()
    recs = [json.loads(line) for line in paths[0].read_text().splitlines()]
    assert recs and all(r["ok"] for r in recs)


def test_enumerate_counts_classes(capsys):
    code, out, _ = run(capsys, "algebra", "enumerate", "--dim", "2", "--format", "json")
    assert code == 0
    assert [c["name"] for c in json.loads(out)] == ["A21", "A22", "A23"]


def test_enumerate_budget_is_exit_one(capsys):
    code, _, _ = run(capsys, "algebra", "enumerate", "--dim", "3", "--budget", "10")
    assert code == 1


def test_canonicalize_prints_a_verified_form(capsys):
    code, out, _ = run(capsys, "algebra", "canonicalize", "1", "0", "2", "0", "--format", "json")
    assert code == 0 and json.loads(out)["form"] == "g1"


def test_literal_three_dimensional_realization_fails_closure(capsys):
    code, _, _ = run(capsys, "algebra", "closure", "--realization", "A32", "--dim", "1", "--literal")
    assert code == 1
    code, _, _ = run(capsys, "algebra", "closure", "--realization", "A32", "--dim", "1")
    assert code == 0


def test_oracle_exit_code_follows_the_verdict(capsys):
    cubic = ["--a", "0", "--f1", "-(u^2 + v^2)*v", "--f2", "(u^2 + v^2)*u"]
    assert run(capsys, "oracle", "--generator", "D", *cubic)[0] == 1
    assert run(capsys, "oracle", "--generator", "2*D - u*d_u - v*d_v", *cubic)[0] == 0


def test_equiv_apply_reports_a_broken_form(capsys):
    cubic = ["--a", "0", "--f1", "-(u^2 + v^2)*v", "--f2", "(u^2 + v^2)*u"]
    assert run(capsys, "equiv", "apply", "--aet", "1", *cubic)[0] == 1
    code, out, _ = run(capsys, "equiv", "apply", "--aet", "2", "--omega", "3", *cubic)
    assert code == 0 and "3*u" in out.replace(" ", "")


def test_simulate_writes_summary_and_table(tmp_path, capsys):
    desc = {"grid": {"m": 1, "n": 64},
            "system": {"view": "exz3", "params": {"sigma": 1}},
            "ic": {"kind": "modulated", "depth": 0.2}, "T": 0.05, "samples": 1,
            "flows": [{"generator": "G1", "theta": 0.2}]}
    path = tmp_path / "run.json"
    path.write_text(json.dumps(desc))
    out = tmp_path / "out"
    code, _, _ = run(capsys, "simulate", str(path), "--out", str(out))
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["flows"][0]["ratio"] < 10
    assert (out / "residuals.csv").read_text().startswith("generator,")
