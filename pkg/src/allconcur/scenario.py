"""Scenario files: declarative JSON descriptions of a check, fuzz or replay run.

A scenario names an overlay, the failure bound ``f``, a mode, budgets and,
for replays, an explicit action list with assertions evaluated after given
steps. ``"Drain"`` in the action list takes the first enabled protocol action
until none is left.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from . import protocol as P
from .overlay import GraphError, parse_graph
from .state import MUTANTS, Config, ConfigError, SystemState
from .tracking import members, rtd_build, rtd_invariant_holds, td_build

MODES = ("exhaustive", "fuzz", "replay")
DRAIN = "Drain"
FLAGS = ("inflight_after_fail", "relay_after_done")

_FIELDS = {
    "name", "description", "overlay", "f", "mode", "actions", "assertions", "checks",
    "flags", "mutant", "maxStates", "nSchedules", "stepCap", "seed", "failProb",
    "fairness", "fairnessWindow",
}
_SERVER_ARGS = {
    "td_nodes": ("p", "root"),
    "td_edges": ("p", "root"),
    "td_build_nodes": ("p", "root"),
    "rtd_nodes": ("p", "root"),
    "rtd_edges": ("p", "root"),
    "rtd_invariant": ("p", "root"),
    "M": ("p",),
    "F": ("p", "t"),
    "done": ("p",),
    "live": (),
    "live_M": (),
    "quiescent": (),
}
ASSERTION_KINDS = tuple(_SERVER_ARGS) + ("event",)


class ScenarioError(ValueError):
    """Malformed scenario; the message names the file and field."""


@dataclass(frozen=True)
class Assertion:
    after_step: int | None  # None: after the last action
    kind: str
    args: dict
    expected: object

    def to_json(self) -> dict:
        return {
            "afterStep": "end" if self.after_step is None else self.after_step,
            "kind": self.kind,
            "args": self.args,
            "expected": self.expected,
        }


@dataclass
class ScenarioFile:
    config: Config
    mode: str = "replay"
    actions: list = field(default_factory=list)  # Action or DRAIN
    assertions: list[Assertion] = field(default_factory=list)
    checks: tuple[str, ...] | None = None
    max_states: int = 10_000_000
    n_schedules: int = 1000
    step_cap: int = 20_000
    seed: int = 0
    fail_prob: float = 0.05
    fairness: bool = True
    fairness_window: int = 200
    name: str = ""
    description: str = ""


def _fail(where: str, msg: str):
    raise ScenarioError(f"{where}: {msg}")


def _int(data: dict, key: str, where: str, default: int, minimum: int = 0) -> int:
    value = data.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        _fail(where, f"field '{key}' must be an integer >= {minimum}, got {value!r}")
    return value


def _action(item, i: int, n: int, where: str):
    if item == DRAIN or item == [DRAIN]:
        return DRAIN
    try:
        action = P.Action.from_json(item)
    except ValueError as exc:
        _fail(where, f"field 'actions[{i}]': {exc}")
    for x in (action.p, action.q):
        if x is not None and not 0 <= x < n:
            _fail(where, f"field 'actions[{i}]': server {x} outside [0, {n})")
    return action


def _assertion(item, i: int, n: int, n_actions: int, where: str) -> Assertion:
    at = f"field 'assertions[{i}]'"
    if not isinstance(item, dict):
        _fail(where, f"{at} must be an object")
    unknown = set(item) - {"afterStep", "kind", "args", "expected"}
    if unknown:
        _fail(where, f"{at}: unknown keys {sorted(unknown)}")
    step = item.get("afterStep", "end")
    if step == "end":
        step = None
    elif isinstance(step, bool) or not isinstance(step, int) or not 0 <= step <= n_actions:
        _fail(where, f"{at}.afterStep must be 'end' or an integer in [0, {n_actions}]")
    kind = item.get("kind")
    if kind not in ASSERTION_KINDS:
        _fail(where, f"{at}.kind must be one of {', '.join(ASSERTION_KINDS)}, got {kind!r}")
    args = item.get("args", {})
    if not isinstance(args, dict):
        _fail(where, f"{at}.args must be an object")
    if "expected" not in item:
        _fail(where, f"{at} needs 'expected'")
    if kind != "event":
        needed = _SERVER_ARGS[kind]
        if set(args) != set(needed):
            _fail(where, f"{at}.args must have exactly {list(needed)}")
        for key in needed:
            value = args[key]
            if isinstance(value, bool) or not isinstance(value, int) or not 0 <= value < n:
                _fail(where, f"{at}.args.{key} must be a server in [0, {n})")
    elif "event" not in args:
        _fail(where, f"{at}.args needs an 'event' name")
    return Assertion(step, kind, args, item["expected"])


def parse_scenario(data, where: str = "<scenario>") -> ScenarioFile:
    if not isinstance(data, dict):
        _fail(where, "top level must be a JSON object")
    unknown = set(data) - _FIELDS
    if unknown:
        _fail(where, f"unknown fields {sorted(unknown)}")
    if "overlay" not in data:
        _fail(where, "missing field 'overlay'")
    try:
        G = parse_graph(data["overlay"])
    except GraphError as exc:
        _fail(where, f"field 'overlay': {exc}")
    f = _int(data, "f", where, 0)
    mode = data.get("mode", "replay")
    if mode not in MODES:
        _fail(where, f"field 'mode' must be one of {', '.join(MODES)}, got {mode!r}")
    flags = data.get("flags", {})
    if not isinstance(flags, dict) or set(flags) - set(FLAGS):
        _fail(where, f"field 'flags' may only set {', '.join(FLAGS)}")
    mutant = data.get("mutant")
    if mutant is not None and mutant not in MUTANTS:
        _fail(where, f"field 'mutant' must be one of {', '.join(MUTANTS)}")
    try:
        config = Config(G, f, mutant=mutant, **{k: bool(v) for k, v in flags.items()})
        config.validate()
    except ConfigError as exc:
        _fail(where, f"configuration: {exc}")
    n = config.n
    raw_actions = data.get("actions", [])
    if not isinstance(raw_actions, list):
        _fail(where, "field 'actions' must be a list")
    actions = [_action(item, i, n, where) for i, item in enumerate(raw_actions)]
    raw_asserts = data.get("assertions", [])
    if not isinstance(raw_asserts, list):
        _fail(where, "field 'assertions' must be a list")
    assertions = [_assertion(item, i, n, len(actions), where) for i, item in enumerate(raw_asserts)]
    checks = data.get("checks")
    if checks is not None and not (isinstance(checks, list) and all(isinstance(c, str) for c in checks)):
        _fail(where, "field 'checks' must be a list of property names")
    fail_prob = data.get("failProb", 0.05)
    if isinstance(fail_prob, bool) or not isinstance(fail_prob, (int, float)) or not 0 <= fail_prob <= 1:
        _fail(where, "field 'failProb' must be a number in [0, 1]")
    fairness = data.get("fairness", True)
    if not isinstance(fairness, bool):
        _fail(where, "field 'fairness' must be true or false")
    return ScenarioFile(
        config=config,
        mode=mode,
        actions=actions,
        assertions=assertions,
        checks=tuple(checks) if checks is not None else None,
        max_states=_int(data, "maxStates", where, 10_000_000, 1),
        n_schedules=_int(data, "nSchedules", where, 1000, 1),
        step_cap=_int(data, "stepCap", where, 20_000, 1),
        seed=_int(data, "seed", where, 0),
        fail_prob=float(fail_prob),
        fairness=fairness,
        fairness_window=_int(data, "fairnessWindow", where, 200, 1),
        name=str(data.get("name", "")),
        description=str(data.get("description", "")),
    )


def load_scenario(path) -> ScenarioFile:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"{path}: cannot read: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return parse_scenario(data, str(path))


def observe(state: SystemState, kind: str, args: dict, events: list[dict]):
    """Value of assertion ``kind`` on ``state`` (``events``: trace so far)."""
    G = state.config.G
    if kind == "event":
        return any(all(e.get(k) == v for k, v in args.items()) for e in events)
    if kind == "live":
        return members(state.live)
    if kind == "live_M":
        return sorted({tuple(members(s.M)) for s in state.servers if s.nf})
    if kind == "quiescent":
        return not P.protocol_actions(state)
    s = state.servers[args["p"]]
    if kind == "M":
        return members(s.M)
    if kind == "F":
        return members(s.F[args["t"]])
    if kind == "done":
        return s.done
    root = args["root"]
    has_msg = bool(s.M >> root & 1)
    if kind == "rtd_invariant":
        return rtd_invariant_holds(s.g[root], root, s.F, has_msg, G)
    if kind.startswith("rtd_"):
        td = rtd_build(root, s.F, has_msg, G)
    elif kind == "td_build_nodes":
        td = td_build(root, s.F, G)
    else:
        td = s.g[root]
    if kind.endswith("_edges"):
        return [list(e) for e in sorted(td.edge_set())]
    return members(td.nodes)


def normalize(value):
    """JSON round trip so tuples compare equal to lists."""
    return json.loads(json.dumps(value))
