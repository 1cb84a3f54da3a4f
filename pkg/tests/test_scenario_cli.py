import json
import subprocess
import sys
from pathlib import Path

import pytest

from allconcur.cli import main
from allconcur.scenario import ScenarioError, load_scenario, parse_scenario

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"
N2 = {"overlay": {"nodes": 2, "edges": [[0, 1], [1, 0]]}, "f": 0, "mode": "exhaustive"}


def write(tmp_path, data, name="s.json"):
    path = tmp_path / name
    path.write_text(data if isinstance(data, str) else json.dumps(data))
    return str(path)


@pytest.mark.parametrize("path", sorted(SCENARIOS.glob("*.json")), ids=lambda p: p.name)
def test_shipped_scenarios_parse(path):
    scenario = load_scenario(path)
    assert scenario.config.n >= 2


def test_malformed_json_location(tmp_path, capsys):
    path = write(tmp_path, '{"overlay": {"nodes": 2,\n  "edges": [[0, 1],]}}')
    with pytest.raises(ScenarioError, match=r"line 2 column 20"):
        load_scenario(path)
    assert main(["check", path]) == 2
    assert "line 2" in capsys.readouterr().err


@pytest.mark.parametrize(
    "data, message",
    [
        ({"overlay": {"nodes": 2, "edges": [[0, 5]]}}, "edges"),
        ({**N2, "mode": "nope"}, "mode"),
        ({**N2, "extra": 1}, "extra"),
        ({**N2, "f": 1}, "connectivity"),
        ({**N2, "mode": "replay", "actions": [["Abcast", 7]]}, r"actions\[0\]"),
        ({**N2, "assertions": [{"afterStep": 0, "kind": "bogus", "expected": 1}]}, "kind"),
    ],
)
def test_scenario_diagnostics(data, message):
    with pytest.raises((ScenarioError, ValueError), match=message):
        parse_scenario(data)


def test_graph_connectivity(capsys):
    assert main(["graph", str(SCENARIOS / "n9.json"), "--connectivity"]) == 0
    assert capsys.readouterr().out.strip() == "3"


def test_graph_several_quantities(tmp_path, capsys):
    out = tmp_path / "g.json"
    assert main(["graph", str(SCENARIOS / "n9.json"), "--connectivity", "--diameter", "--out", str(out)]) == 0
    assert "connectivity: 3" in capsys.readouterr().out
    assert json.loads(out.read_text())["connectivity"] == 3


def test_check_two_servers(tmp_path):
    out = tmp_path / "v.json"
    assert main(["check", str(SCENARIOS / "n2_k2_f0.json"), "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["mode"] == "exhaustive" and all(v["status"] == "pass" for v in report["verdicts"])


def test_budget_exhausted_is_not_a_pass(tmp_path):
    assert main(["check", write(tmp_path, {**N2, "f": 0}), "--max-states", "5"]) == 1


def test_replay_trace(tmp_path):
    trace = tmp_path / "t.jsonl"
    assert main(["replay", str(SCENARIOS / "fig2.json"), "--trace", str(trace)]) == 0
    lines = [json.loads(line) for line in trace.read_text().splitlines()]
    assert lines[0] == {"step": 1, "action": ["Abcast", 0], **lines[0]}
    assert any(e.get("event") == "recv_fail" and (e["p"], e["o"], e["t"]) == (6, 4, 0) for e in lines)


def test_fuzz_output_reproducible(tmp_path):
    outs = []
    for i in range(2):
        out, trace = tmp_path / f"v{i}.json", tmp_path / f"t{i}.jsonl"
        code = main(["fuzz", str(SCENARIOS / "n9.json"), "--schedules", "5", "--out", str(out), "--trace", str(trace)])
        assert code == 0
        outs.append((out.read_bytes(), trace.read_bytes()))
    assert outs[0] == outs[1]


def test_seed_precedence(tmp_path, monkeypatch):
    path = str(SCENARIOS / "n9.json")

    def seed_of(*extra):
        out = tmp_path / "v.json"
        main(["fuzz", path, "--schedules", "1", "--out", str(out), *extra])
        return json.loads(out.read_text())["stats"]["seed"]

    assert seed_of() == 2024
    monkeypatch.setenv("ALLCONCUR_SEED", "77")
    assert seed_of() == 77
    assert seed_of("--seed", "5") == 5
    monkeypatch.setenv("ALLCONCUR_SEED", "x")
    assert main(["fuzz", path, "--schedules", "1"]) == 2


def test_mutant_writes_counterexample(tmp_path):
    ce = tmp_path / "ce.json"
    data = {**N2, "overlay": {"nodes": 3, "edges": [[a, b] for a in range(3) for b in range(3) if a != b]}}
    path = write(tmp_path, {**data, "mutant": "early_deliver"})
    assert main(["check", path, "--stop-on-violation", "--counterexample", str(ce)]) == 1
    scenario = json.loads(ce.read_text())
    assert scenario["mode"] == "replay" and scenario["mutant"] == "early_deliver"
    assert main(["replay", str(ce)]) == 1


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "allconcur", "graph", str(SCENARIOS / "n2_k2_f0.json"), "--diameter"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0 and proc.stdout.strip() == "1"
