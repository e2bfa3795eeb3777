"""Command-line behavior: outputs, exit codes, determinism."""

import json

from cplkit.cli import main
from cplkit.denot import sat
from cplkit.fixtures import fixture_path
from cplkit.lang import expand_derived, parse_guard
from cplkit.simulator import load_scenario

from oracles import brute_causal_count, chart, ev, reachability, vars_of

MERGE = str(fixture_path("merge_review"))

GUARD = (
    'At[TestRunner].candidate == Here.candidate'
    ' && at(TestRunner, !(Here.status == "failed") S Here.status == "passed")'
)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


# ---------------------------------------------------------------------- #
# check
# ---------------------------------------------------------------------- #

def test_check_merge_choice_event(capsys):
    code, out, _ = run(capsys, "check", MERGE, "--guard", GUARD, "--event", "5")
    assert code == 0
    report = json.loads(out)
    assert report == [{"event": 5, "guard": GUARD, "value": True}]


def test_check_without_guards_is_empty(capsys, tmp_path):
    trace = tmp_path / "t.json"
    trace.write_text(json.dumps(chart(["A"], [ev(0, "A", "act")])))
    code, out, _ = run(capsys, "check", str(trace))
    assert code == 0
    assert json.loads(out) == []


def test_check_uses_embedded_scenario_guards(capsys):
    code, out, _ = run(capsys, "check", MERGE, "--event", "5")
    assert code == 0
    (entry,) = json.loads(out)
    assert entry["value"] is True


def test_check_matches_library_sat(capsys):
    code, out, _ = run(capsys, "check", MERGE, "--guard", GUARD)
    assert code == 0
    m = load_scenario(fixture_path("merge_review")).msc
    f = expand_derived(parse_guard(GUARD, set(m.lifelines)), m.lifelines)
    for entry in json.loads(out):
        assert entry["value"] == sat(m, entry["event"], f)


def test_check_bad_inputs_exit_2(capsys, tmp_path):
    code, _, err = run(capsys, "check", MERGE, "--guard", "at(Nope, true)")
    assert code == 2 and "unknown lifeline" in err
    code, _, err = run(capsys, "check", MERGE, "--guard", GUARD, "--event", "99")
    assert code == 2 and "no such event" in err
    bad = tmp_path / "bad.json"
    bad.write_text('{"lifelines": []}')
    code, _, err = run(capsys, "check", str(bad))
    assert code == 2
    broken = tmp_path / "broken.json"
    broken.write_text(
        json.dumps(chart(["A"], [ev(0, "A", "recv")]))
    )
    code, _, err = run(capsys, "check", str(broken))
    assert code == 2 and "not well-formed" in err


# ---------------------------------------------------------------------- #
# simulate
# ---------------------------------------------------------------------- #

def test_simulate_is_deterministic(capsys):
    code, out1, _ = run(capsys, "simulate", MERGE, "--seed", "7", "--extensions", "1")
    code2, out2, _ = run(capsys, "simulate", MERGE, "--seed", "7", "--extensions", "1")
    assert code == code2 == 0
    assert out1 == out2


def test_simulate_merge_verdict_true_when_failure_late(capsys):
    code, out, _ = run(capsys, "simulate", MERGE, "--seed", "3", "--extensions", "4")
    assert code == 0
    logs = json.loads(out)
    for log in logs:
        verdict = [r["verdict"] for r in log["records"] if r["event"] == 5]
        if log["order"].index(6) > log["order"].index(5):
            assert verdict == [True]


def test_simulate_agrees_with_check(capsys):
    code, out, _ = run(capsys, "simulate", MERGE, "--seed", "1")
    log = json.loads(out)
    (verdict,) = [r["verdict"] for r in log["records"] if r["event"] == 5]
    code, out, _ = run(capsys, "check", MERGE, "--event", "5")
    (entry,) = json.loads(out)
    assert verdict == entry["value"] is True


def test_simulate_writes_out_file(capsys, tmp_path):
    out_file = tmp_path / "log.json"
    code, out, _ = run(capsys, "simulate", MERGE, "--out", str(out_file))
    assert code == 0 and out == ""
    assert json.loads(out_file.read_text())["order"]


def test_simulate_cpl_seed_env(capsys, monkeypatch):
    monkeypatch.setenv("CPL_SEED", "99")
    _, from_env, _ = run(capsys, "simulate", MERGE)
    monkeypatch.delenv("CPL_SEED")
    _, explicit, _ = run(capsys, "simulate", MERGE, "--seed", "99")
    assert from_env == explicit


def test_simulate_rejects_bad_scenarios(capsys, tmp_path):
    bad = tmp_path / "sc.json"
    bad.write_text(json.dumps({"lifelines": ["A"], "events": [], "succ": [],
                               "messages": [], "guards": [{"oops": 1}]}))
    code, _, err = run(capsys, "simulate", str(bad))
    assert code == 2


# ---------------------------------------------------------------------- #
# fuzz
# ---------------------------------------------------------------------- #

def test_fuzz_zero_seeds(capsys):
    code, out, _ = run(capsys, "fuzz", "--seeds", "0")
    assert code == 0
    summary = json.loads(out)
    assert summary["instances"] == 0 and summary["ok"]


def test_fuzz_small_sweep_passes(capsys):
    code, out, _ = run(capsys, "fuzz", "--seeds", "40", "--extensions", "2",
                       "--seed", "6")
    assert code == 0
    summary = json.loads(out)
    assert summary["ok"] and summary["instances"] == 40


def test_fuzz_mutations_exit_1(capsys):
    for mode in ("swap-merge-order", "strict-at", "live-old"):
        code, out, _ = run(
            capsys, "fuzz", "--seeds", "200", "--extensions", "3",
            "--seed", "1", "--mutate", mode,
        )
        assert code == 1, mode
        summary = json.loads(out)
        total = (
            summary["mismatch_count"]
            + summary["coherence_failure_count"]
            + summary["invariant_failure_count"]
        )
        assert total >= 1


def test_fuzz_keep_going_collects_more(capsys):
    code, out, _ = run(
        capsys, "fuzz", "--seeds", "30", "--extensions", "2", "--seed", "1",
        "--mutate", "strict-at", "--keep-going",
    )
    assert code == 1
    assert json.loads(out)["instances"] == 30


def test_fuzz_jobs_match_serial(capsys):
    _, serial, _ = run(capsys, "fuzz", "--seeds", "12", "--extensions", "2",
                       "--seed", "4", "--keep-going")
    _, parallel, _ = run(capsys, "fuzz", "--seeds", "12", "--extensions", "2",
                         "--seed", "4", "--keep-going", "--jobs", "2")
    a, b = json.loads(serial), json.loads(parallel)
    a.pop("elapsed_seconds"), b.pop("elapsed_seconds")
    assert a == b


# ---------------------------------------------------------------------- #
# explain
# ---------------------------------------------------------------------- #

def test_explain_isolated_event(capsys, tmp_path):
    trace = tmp_path / "t.json"
    trace.write_text(
        json.dumps(
            chart(["A", "B"], [ev(0, "A", "act", vars_of(x=1)), ev(1, "B", "act")])
        )
    )
    code, out, _ = run(capsys, "explain", str(trace), "--event", "0")
    assert code == 0
    rows = json.loads(out)
    assert rows == [
        {"lifeline": "A", "event": 0, "local_index": 1,
         "valuation": {"x": {"int": 1}}}
    ]


def test_explain_merge_choice(capsys):
    code, out, _ = run(capsys, "explain", MERGE, "--event", "5")
    assert code == 0
    rows = {r["lifeline"]: r for r in json.loads(out)}
    tr = rows["TestRunner"]
    assert tr["event"] == 0 and tr["local_index"] == 1
    assert tr["valuation"]["status"] == {"str": "passed"}


def test_explain_indices_equal_brute_counts(capsys):
    m = load_scenario(fixture_path("merge_review")).msc
    closure = reachability(m)
    for e in m.events:
        code, out, _ = run(capsys, "explain", MERGE, "--event", str(e))
        assert code == 0
        for row in json.loads(out):
            assert row["local_index"] == brute_causal_count(
                m, closure, e, row["lifeline"]
            )


def test_explain_unknown_event_exits_2(capsys):
    code, _, err = run(capsys, "explain", MERGE, "--event", "42")
    assert code == 2 and "no such event" in err


def test_explain_pretty_is_human_readable(capsys):
    code, out, _ = run(capsys, "explain", MERGE, "--event", "5", "--pretty")
    assert code == 0
    assert "TestRunner: event 0 (index 1)" in out
