import json
from pathlib import Path

import pytest

from mhr_acl.cli import corpus_dir, main
from mhr_acl.kernel import Event
from mhr_acl.scenario import ScenarioError, format_scenario, parse_scenario, run_scenario
from mhr_acl.state import Consumer, Operator, Provider, RecordCategory

HEADER = "universe people=2 spaces=2 records=2 providers=1 operators=1\n"


def write(tmp_path, text, name="s.scenario"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


# -- parsing -----------------------------------------------------------------

def test_parse_resolves_actor_namespaces():
    sc = parse_scenario(HEADER + "view_record p1 r1\nview_record sp1 r1\nview_record op1 r1\n")
    assert [s.event.args[0] for s in sc.steps] == [Consumer("p1"), Provider("sp1"), Operator("op1")]
    assert sc.operators == {"op1"}


def test_parse_expectations_and_comments():
    sc = parse_scenario("# hi\n" + HEADER + "register_consumer p1 m1  # note\n"
                        "opt_out p2 expect deny\nopt_out p1 expect ok\n")
    assert [(s.expect, s.line) for s in sc.steps] == [(None, 3), (False, 4), (True, 5)]
    assert sc.steps[0].event == Event("register_consumer", ("p1", "m1"))


def test_parse_category():
    sc = parse_scenario(HEADER + "upload_record p1 p1 r1 restricted\n")
    assert sc.steps[0].event.args[-1] is RecordCategory.RESTRICTED


def test_header_defaults():
    sc = parse_scenario("universe people=1 spaces=1 records=1\n")
    assert sc.sizes == dict(people=1, spaces=1, records=1, providers=0, operators=0)


@pytest.mark.parametrize("text,line,col,fragment", [
    (HEADER + "frobnicate p1\n", 2, 1, "unknown event"),
    ("frobnicate p1\n", 1, 1, "unknown event"),
    ("register_consumer p1 m1\n", 1, 1, "universe"),
    (HEADER + "register_consumer p1\n", 2, 21, "takes 2 arguments"),
    (HEADER + "register_consumer p1 m1 m2\n", 2, 25, "takes 2 arguments"),
    (HEADER + "register_consumer p7 m1\n", 2, 19, "not a person"),
    (HEADER + "upload_record p1 p1 r1 secret\n", 2, 24, "not a category"),
    (HEADER + "opt_out p1 expect maybe\n", 2, 19, "'ok' or 'deny'"),
    ("universe people=1 spaces=x records=1\n", 1, 26, "non-negative integer"),
    ("universe people=1 records=1\n", 1, 1, "missing spaces"),
    ("", 1, 1, "empty"),
    (HEADER + HEADER, 2, 1, "duplicate"),
])
def test_parse_errors_carry_position(text, line, col, fragment):
    with pytest.raises(ScenarioError) as info:
        parse_scenario(text)
    assert (info.value.line, info.value.col) == (line, col)
    assert fragment in info.value.message


def test_format_round_trips():
    sc = parse_scenario(HEADER + "register_consumer p1 m1 expect ok\nopt_out p2 expect deny\n")
    res = run_scenario(sc)
    text = format_scenario(sc.sizes, [s.event for s in sc.steps], [r.error for r in res.results])
    again = parse_scenario(text)
    assert [(s.event, s.expect) for s in again.steps] == [(s.event, s.expect) for s in sc.steps]


def test_run_stops_at_first_mismatch():
    sc = parse_scenario(HEADER + "opt_out p1 expect ok\nregister_consumer p1 m1\n")
    res = run_scenario(sc)
    assert not res.passed and len(res.results) == 1
    assert res.mismatch.error.guard == "grd1"


# -- cli: run ----------------------------------------------------------------

def test_cli_run_ok(tmp_path, capsys):
    path = write(tmp_path, HEADER + "register_consumer p1 m1 expect ok\n")
    assert main(["run", path]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["passed"] and out["steps"] == 1 and len(out["final_digest"]) == 16


def test_cli_run_wrong_expectation(tmp_path, capsys):
    path = write(tmp_path, HEADER + "opt_out p1 expect ok\n")
    assert main(["run", path]) == 1
    assert "expected ok, got deny (grd1" in capsys.readouterr().err


def test_cli_run_parse_error(tmp_path, capsys):
    path = write(tmp_path, HEADER + "opt_out\n")
    assert main(["run", path]) == 2
    assert ":2:" in capsys.readouterr().err


def test_cli_run_missing_file(tmp_path):
    assert main(["run", str(tmp_path / "absent.scenario")]) == 2


def test_cli_run_dump_and_trace(tmp_path, capsys):
    path = write(tmp_path, HEADER + "register_consumer p1 m1\n")
    assert main(["run", path, "--dump", "--trace"]) == 0
    cap = capsys.readouterr()
    assert json.loads(cap.out)["consumers"] == ["p1"]
    assert "register_consumer p1 m1 -> ok" in cap.err


@pytest.mark.parametrize("name", ["p09_revoked_provider_denied.scenario",
                                  "p16_owner_loses_control.scenario"])
def test_cli_runs_corpus_file(name, capsys):
    assert main(["run", str(corpus_dir() / name)]) == 0


def test_cli_corpus(capsys):
    assert main(["corpus"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["failed"] == 0 and out["passed"] >= 30


def test_cli_corpus_reports_failure(tmp_path, capsys):
    write(tmp_path, HEADER + "opt_out p1 expect ok\n", "bad.scenario")
    write(tmp_path, HEADER + "opt_out p1 expect deny\n", "good.scenario")
    assert main(["corpus", "--dir", str(tmp_path)]) == 1
    assert json.loads(capsys.readouterr().out)["failed"] == 1


# -- cli: check --------------------------------------------------------------

def test_cli_check_depth_zero(capsys):
    assert main(["check", "--depth", "0"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["states_visited"] == 1 and out["violations"] == []


def test_cli_check_random(capsys):
    assert main(["check", "--mode", "random", "--traces", "5", "--length", "5", "--seed", "9"]) == 0
    assert json.loads(capsys.readouterr().out)["mode"] == "random"


def test_cli_check_mutant_writes_counterexample(tmp_path, capsys):
    out_dir = tmp_path / "cx"
    code = main(["check", "--records", "1", "--depth", "3", "--mutant", "drop_grd1_r2",
                 "--stop-on-violation", "--out-dir", str(out_dir)])
    assert code == 1
    out = json.loads(capsys.readouterr().out)
    files = [Path(f) for f in out["counterexample_files"]]
    assert len(files) == 1 and files[0].exists()
    text = files[0].read_text()
    assert "violates INV-14 under mutant drop_grd1_r2" in text
    # the unmutated model rejects the recorded final step
    assert main(["run", str(files[0])]) == 1


def test_cli_check_cap(monkeypatch, capsys):
    assert main(["check", "--depth", "4", "--cap", "10"]) == 3
    monkeypatch.setenv("MHR_ACL_CAP", "10")
    assert main(["check", "--depth", "4"]) == 3
    assert "cap" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["check", "--seed", "1"],
    ["check", "--mode", "random", "--depth", "3"],
    ["check", "--people", "0"],
    ["check", "--invariants", "INV-99"],
    ["check", "--mutant", "nope"],
    ["check", "--mode", "sideways"],
    ["frobnicate"],
])
def test_cli_usage_errors(argv):
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    assert code == 2


def test_cli_check_invariant_subset(capsys):
    assert main(["check", "--depth", "2", "--invariants", "INV-9,inv-10"]) == 0


def test_cli_check_output_is_stable(capsys):
    main(["check", "--depth", "3"])
    first = capsys.readouterr().out
    main(["check", "--depth", "3"])
    assert capsys.readouterr().out == first
