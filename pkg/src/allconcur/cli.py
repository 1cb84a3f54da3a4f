"""Command line: ``allconcur {check,fuzz,replay,graph} <scenario.json>``.

Exit status is 0 when every verdict passes, 1 on a violation or an
inconclusive run, 2 on a usage, scenario or configuration error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import checker
from .overlay import GraphError, diameter, fault_diameter, vertex_connectivity
from .scenario import ScenarioError, ScenarioFile, load_scenario
from .state import ConfigError

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2


def _dump(data, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def _seed(args, scenario: ScenarioFile) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("ALLCONCUR_SEED")
    if env:
        try:
            return int(env, 0)
        except ValueError:
            raise ScenarioError(f"ALLCONCUR_SEED must be an integer, got {env!r}") from None
    return scenario.seed


def _counterexample_path(args) -> Path:
    if args.counterexample:
        return Path(args.counterexample)
    if args.out:
        out = Path(args.out)
        return out.with_name(out.stem + ".counterexample.json")
    return Path(Path(args.file).stem + ".counterexample.json")


def _finish(args, report: checker.Report) -> int:
    for v in report.verdicts:
        print(f"{v.property:20s} {v.status:12s} {v.violations}/{v.runs}")
    summary = " ".join(f"{k}={v}" for k, v in report.stats.items())
    print(f"[{report.mode}] {summary}")
    if args.out:
        _dump(report.to_json(), Path(args.out))
    failed = report.failed
    if failed:
        ce = failed[0].counterexample or {}
        if "scenario" in ce:
            path = _counterexample_path(args)
            _dump(ce["scenario"], path)
            print(f"counterexample for {failed[0].property} written to {path}")
        return EXIT_VIOLATION
    return EXIT_OK if report.passed else EXIT_VIOLATION


def _checks(args, scenario: ScenarioFile):
    return args.checks.split(",") if args.checks else scenario.checks


def _run_exhaustive(args, scenario: ScenarioFile) -> int:
    max_states = args.max_states or scenario.max_states
    report = checker.explore_exhaustive(
        scenario.config, _checks(args, scenario), max_states, stop_on_violation=args.stop_on_violation
    )
    return _finish(args, report)


def _run_fuzz(args, scenario: ScenarioFile) -> int:
    seed = _seed(args, scenario)
    schedules = getattr(args, "schedules", None) or scenario.n_schedules
    report = checker.fuzz_schedules(
        scenario.config,
        schedules,
        seed,
        _checks(args, scenario),
        step_cap=scenario.step_cap,
        fail_prob=scenario.fail_prob,
        fairness=scenario.fairness,
        fairness_window=scenario.fairness_window,
        stop_on_violation=args.stop_on_violation,
    )
    if getattr(args, "trace", None):
        run = checker.run_schedule(
            scenario.config,
            checker.schedule_seed(seed, args.trace_schedule),
            _checks(args, scenario),
            scenario.step_cap,
            scenario.fail_prob,
            scenario.fairness,
            scenario.fairness_window,
            keep_trace=True,
        )
        _write_trace(run.trace, Path(args.trace))
    return _finish(args, report)


def _write_trace(lines, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("".join(line + "\n" for line in lines))


def _run_replay(args, scenario: ScenarioFile) -> int:
    trace, report = checker.replay_scenario(scenario, _checks(args, scenario))
    if getattr(args, "trace", None):
        _write_trace(trace, Path(args.trace))
    return _finish(args, report)


def cmd_check(args) -> int:
    scenario = load_scenario(args.file)
    runner = {"exhaustive": _run_exhaustive, "fuzz": _run_fuzz, "replay": _run_replay}[scenario.mode]
    return runner(args, scenario)


def cmd_fuzz(args) -> int:
    return _run_fuzz(args, load_scenario(args.file))


def cmd_replay(args) -> int:
    return _run_replay(args, load_scenario(args.file))


def cmd_graph(args) -> int:
    G = load_scenario(args.file).config.G
    results = {}
    if args.connectivity:
        results["connectivity"] = vertex_connectivity(G)
    if args.diameter:
        results["diameter"] = diameter(G)
    if args.fault_diameter is not None:
        results["fault_diameter"] = fault_diameter(G, args.fault_diameter)
    if args.dump:
        print(json.dumps(G.to_dict()))
    if len(results) == 1:
        print(next(iter(results.values())))
    else:
        for key, value in results.items():
            print(f"{key}: {value}")
    if args.out:
        _dump(results, Path(args.out))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="allconcur", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, outputs=True):
        p.add_argument("file", help="scenario JSON file")
        if outputs:
            p.add_argument("--out", help="write the verdict report (JSON) here")
            p.add_argument("--counterexample", help="where to write a failing prefix as a replay scenario")
            p.add_argument("--checks", help="comma-separated property names (default: all)")
            p.add_argument("--stop-on-violation", action="store_true", help="stop at the first violation")
            p.add_argument("--seed", type=lambda s: int(s, 0), help="campaign seed (overrides ALLCONCUR_SEED)")
            p.add_argument("--max-states", type=int, help="state budget for exhaustive runs")

    p = sub.add_parser("check", help="run the scenario in its own mode")
    common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("fuzz", help="seeded random schedules")
    common(p)
    p.add_argument("--schedules", type=int, help="number of schedules")
    p.add_argument("--trace", help="write the JSONL trace of one schedule here")
    p.add_argument("--trace-schedule", type=int, default=0, help="which schedule --trace records")
    p.set_defaults(func=cmd_fuzz)

    p = sub.add_parser("replay", help="apply the scenario's action list")
    common(p)
    p.add_argument("--trace", help="write the JSONL trace here")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("graph", help="overlay utilities")
    common(p, outputs=False)
    p.add_argument("--connectivity", action="store_true", help="vertex connectivity")
    p.add_argument("--diameter", action="store_true", help="diameter")
    p.add_argument("--fault-diameter", type=int, metavar="F", help="worst diameter after removing F servers")
    p.add_argument("--dump", action="store_true", help="print the overlay as a JSON literal")
    p.add_argument("--out", help="write the results (JSON) here")
    p.set_defaults(func=cmd_graph)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, ConfigError, GraphError, checker.CheckError, checker.ReplayError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
