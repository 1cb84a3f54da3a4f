import pytest

from allconcur import checker
from allconcur import protocol as P
from allconcur.net import bcast
from allconcur.overlay import complete_digraph, make_circulant
from allconcur.scenario import parse_scenario
from allconcur.state import Config

A = P.Action


def test_two_servers_exhaustive():
    terminal = []
    report = checker.explore_exhaustive(Config(complete_digraph(2), 0), on_quiescent=terminal.append)
    assert report.passed
    assert report.stats["states"] == 21 and report.stats["complete"]
    assert terminal and all(s.servers[0].M == s.servers[1].M == 0b11 for s in terminal)
    assert all(x.done for s in terminal for x in s.servers)


def test_three_servers_no_failures():
    report = checker.explore_exhaustive(Config(complete_digraph(3), 0))
    assert report.passed and report.stats["states"] == 54220


def test_budget_is_inconclusive():
    report = checker.explore_exhaustive(Config(complete_digraph(3), 1), max_states=500)
    assert not report.stats["complete"]
    assert {v.status for v in report.verdicts} == {"inconclusive"}
    assert not report.passed


def test_unknown_property_rejected():
    with pytest.raises(checker.CheckError):
        checker.explore_exhaustive(Config(complete_digraph(2), 0), checks=["nope"])


def test_selected_properties_only():
    report = checker.explore_exhaustive(Config(complete_digraph(2), 0), checks=["accuracy", "integrity"])
    assert [v.property for v in report.verdicts] == ["accuracy", "integrity"]


def test_counterexample_is_shortest_and_replays():
    cfg = Config(complete_digraph(3), 0, mutant="early_deliver")
    report = checker.explore_exhaustive(cfg, checks=["set_agreement"], stop_on_violation=True)
    ce = report.verdict("set_agreement").counterexample
    # shortest: 0 and 1 broadcast and each delivers only its own message
    assert [tuple(a) for a in ce["scenario"]["actions"]] == [("Abcast", 0), ("Abcast", 1), ("Adeliver", 0), ("Adeliver", 1)]
    _, replay = checker.replay_scenario(parse_scenario(ce["scenario"]))
    assert replay.verdict("set_agreement").status == "fail"


def test_fuzz_without_failures_delivers_everything():
    report = checker.fuzz_schedules(Config(make_circulant(5, [1, 2]), 0), 20, seed=3)
    assert report.passed and report.stats["quiescent"] == 20
    run = checker.run_schedule(Config(make_circulant(5, [1, 2]), 0), 99)
    assert run.quiescent and all(s.done and s.M == 0b11111 for s in run.final.servers)


def test_schedule_replay_is_identical():
    cfg = Config(make_circulant(9, [1, 2, 4]), 2)
    a = checker.run_schedule(cfg, checker.schedule_seed(5, 0), keep_trace=True)
    b = checker.run_schedule(cfg, checker.schedule_seed(5, 0), keep_trace=True)
    c = checker.run_schedule(cfg, checker.schedule_seed(5, 1), keep_trace=True)
    assert a.trace == b.trace and a.trace_hash == b.trace_hash
    assert a.trace_hash != c.trace_hash


def test_fuzz_report_is_deterministic():
    cfg = Config(make_circulant(5, [1, 2]), 1)
    a = checker.fuzz_schedules(cfg, 10, seed=1).to_json()
    b = checker.fuzz_schedules(cfg, 10, seed=1).to_json()
    assert a == b


def test_fuzz_catches_early_delivery():
    cfg = Config(make_circulant(5, [1, 2]), 1, mutant="early_deliver")
    report = checker.fuzz_schedules(cfg, 30, seed=2)
    v = report.verdict("done_empty")
    assert v.status == "fail" and v.counterexample["scenario"]["mutant"] == "early_deliver"


def test_monitor_flags_message_from_nowhere():
    state = P.init(Config(complete_digraph(3), 0))
    monitor = checker.TraceMonitor(state)
    found = monitor.observe(state, A(P.RECEIVE, 1), ("deliver", 1, bcast(0)), state)
    assert [name for name, _ in found] == ["link_fifo"]


def test_monitor_flags_transmission_after_detection():
    # with in-flight completion a failed server can overtake its own failure notice
    cfg = Config(complete_digraph(3), 1, inflight_after_fail=True)
    scenario = parse_scenario(
        {
            "overlay": cfg.G.to_dict(),
            "f": 1,
            "flags": {"inflight_after_fail": True},
            "actions": [["Abcast", 0], ["Fail", 0], ["DetectFail", 1, 0], ["TXMsg", 0, 1], ["ReceiveMessage", 1]],
        }
    )
    _, report = checker.replay_scenario(scenario)
    assert report.verdict("fd_ordering").status == "fail"
    assert report.verdict("message_path").status == "pass"


def test_replay_reports_disabled_step():
    scenario = parse_scenario({"overlay": {"nodes": 2, "edges": [[0, 1], [1, 0]]}, "actions": [["Adeliver", 0]]})
    with pytest.raises(checker.ReplayError, match=r"actions\[0\]"):
        checker.replay_scenario(scenario)


def test_empty_replay_checks_initial_state():
    scenario = parse_scenario({"overlay": {"nodes": 2, "edges": [[0, 1], [1, 0]]}})
    trace, report = checker.replay_scenario(scenario)
    assert trace == [] and report.passed
    assert "termination" not in {v.property for v in report.verdicts}


def test_assertion_failure_reported():
    scenario = parse_scenario(
        {
            "overlay": {"nodes": 2, "edges": [[0, 1], [1, 0]]},
            "actions": [["Abcast", 0]],
            "assertions": [{"afterStep": 1, "kind": "M", "args": {"p": 0}, "expected": [1]}],
        }
    )
    _, report = checker.replay_scenario(scenario)
    v = report.verdict("assertions")
    assert v.status == "fail" and v.counterexample["actual"] == [0]
