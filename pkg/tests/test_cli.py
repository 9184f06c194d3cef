import io
import json
from fractions import Fraction
from importlib import resources

import pytest

from pbpsc.cli import main


def path(name):
    return str(resources.files("pbpsc") / "fixtures" / f"{name}.json")


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def test_compute_mw_fixture():
    code, text = run("compute", path("ear_unreachable"))
    assert code == 0
    assert text == "selected: {w, x}\ncost: 2/1\nslack: 0/1\n"


def test_compute_empty_instance(tmp_path):
    doc = tmp_path / "empty.json"
    doc.write_text('{"limit": 1, "candidates": [], "voters": [{"id": "1"}]}')
    assert run("compute", str(doc)) == (0, "selected: {}\ncost: 0/1\nslack: 1/1\n")


def test_compute_trace_deductions(tmp_path):
    trace = tmp_path / "t.json"
    out = tmp_path / "o.json"
    code, _ = run("compute", path("ipsc_not_cpsc"), "--trace", str(trace), "--output", str(out))
    assert code == 0
    costs = {"a": Fraction(1), "b": Fraction(9, 10), "c": Fraction(1)}
    steps = [s for s in json.loads(trace.read_text())["steps"] if s["chosen"]]
    assert steps
    for s in steps:
        assert sum(Fraction(d) for d in s["deductions"].values()) == 4 * costs[s["chosen"]] / 2
    doc = json.loads(out.read_text())
    assert sorted(doc["selected"]) == sorted(s["chosen"] for s in steps)
    assert Fraction(doc["cost"]) + Fraction(doc["slack"]) == 2


def test_verify_first_fixture():
    code, text = run("verify", path("ipsc_not_cpsc"), "b,c", "--axiom", "ipsc,cpsc")
    assert code == 1
    assert "ipsc: satisfied\ncpsc: violated\n" in text
    assert "N' = {1, 2}" in text


def test_verify_empty_outcome_not_exhaustive():
    code, text = run("verify", path("ipsc_not_cpsc"), "", "-a", "exhaustive")
    assert code == 1 and "exhaustive: violated" in text


def test_verify_pjr_fixture():
    code, text = run("verify", path("pjr_not_ipsc"), "u,v,w,x,y,z", "-a", "pjr", "-a", "ipsc")
    assert code == 1
    assert "pjr: satisfied" in text and "ipsc: violated" in text


def test_verify_all_satisfied_and_outcome_file(tmp_path):
    doc = tmp_path / "w.json"
    doc.write_text('{"selected": ["w", "y"]}')
    assert run("verify", path("ear_unreachable"), str(doc), "-a", "ipsc")[0] == 0


def test_verify_infeasible_is_usage_error(capsys):
    code, _ = run("verify", path("ipsc_not_cpsc"), "a,b,c", "-a", "ipsc")
    assert code == 2
    assert "exceeds the limit" in capsys.readouterr().err


def test_search():
    assert run("search", path("no_cpsc_one_voter"), "--axiom", "cpsc") == (3, "no CPSC outcome exists\n")
    code, text = run("search", path("no_cpsc_one_voter"), "--axiom", "maxcost", "--first")
    assert code == 0 and "{b, c}" in text
    for name in ("ipsc_not_cpsc", "cpsc_not_ipsc", "ear_unreachable", "pjr_not_ipsc",
                 "no_cpsc_one_voter", "knapsack_one_voter"):
        assert run("search", path(name), "-a", "ipsc", "--first")[0] == 0


def test_mw_flag(tmp_path):
    doc = tmp_path / "mw.json"
    doc.write_text('{"candidates": [{"id": "a"}, {"id": "b"}],\n"voters": [{"id": "1", "prefs": [["b"]]}]}')
    assert run("compute", str(doc), "--mw", "1")[1].startswith("selected: {b}")


def test_parse_error_is_line_anchored(tmp_path, capsys):
    doc = tmp_path / "bad.json"
    doc.write_text('{"limit": 2,\n"candidates": [{"id": "a", "cost": 1}],\n"voters": [\n{"id": "1", "weight": 2}\n]}')
    assert run("compute", str(doc))[0] == 2
    assert "line 3:" in capsys.readouterr().err
    assert run("compute", str(doc), "--normalize")[0] == 0


def test_parse_error_line_number(tmp_path, capsys):
    doc = tmp_path / "bad.json"
    doc.write_text('{"limit": 2,\n"candidates": [\n{"id": "a", "cost": "zero"}\n],\n"voters": [{"id": "1"}]}')
    assert run("compute", str(doc))[0] == 2
    assert "line 3:" in capsys.readouterr().err


def test_gen_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for target in (a, b):
        assert run("gen", "--seed", "7", "-n", "5", "-m", "4", "--prefs", "weak", "--costs", "uniform",
                   "--output", str(target))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert run("compute", str(a))[0] == 0


def test_gen_invalid(capsys):
    assert run("gen", "-n", "0")[0] == 2
    assert run("gen", "--p", "1.5")[0] == 2


def test_usage_errors(capsys):
    assert run()[0] == 2
    assert run("verify", path("ipsc_not_cpsc"), "b", "-a", "ejr")[0] == 2
    assert run("compute", "/nonexistent.json")[0] == 2
    assert run("compute", path("ipsc_not_cpsc"), "--selection", "random")[0] == 2


def test_crosscheck_small():
    code, text = run("crosscheck", "--seeds", "10", "--sizes", "4x4")
    assert code == 0
    assert text.splitlines()[0].split() == ["suite", "cases", "checks", "counterexamples", "status"]


def test_crosscheck_mutation_fails():
    code, text = run("crosscheck", "--seeds", "10", "--suite", "oracle", "--mutate", "ipsc-flip")
    assert code == 1 and "FAIL" in text and '"limit"' in text


@pytest.mark.parametrize("bad", [["--sizes", "6"], ["--suite", "nope"]])
def test_crosscheck_usage(bad):
    assert run("crosscheck", *bad)[0] == 2
