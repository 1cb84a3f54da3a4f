"""Verification harness: exhaustive BFS, seeded schedule fuzzing, scenario replay.

All three drivers share :class:`StepChecker`, which evaluates the state,
transition and quiescence properties, and :class:`TraceMonitor`, which checks
the properties that depend on how a state was reached (message paths, link
order, detector ordering, tracking coverage before delivery).
"""

from __future__ import annotations

import json
import random
from array import array
from collections import deque
from dataclasses import dataclass, field
from hashlib import blake2b
from typing import Callable, Iterable

from . import kernels
from . import protocol as P
from .net import Kind, StepDisabled
from .state import Config, SystemState
from .tracking import members

STATE_PROPERTIES = (
    "accuracy",
    "integrity",
    "set_agreement",
    "failure_budget",
    "done_empty",
    "td_invariants",
    "td_equivalence",
    "rtd_superset",
    "rtd_invariant",
)
TRANSITION_PROPERTIES = (
    "done_stability",
    "flags_monotone",
    "rtd_monotonic",
    "removal_trichotomy",
)
QUIESCENCE_PROPERTIES = ("termination", "validity", "completeness")
TRACE_PROPERTIES = ("message_path", "link_fifo", "fd_ordering", "delivery_tracking")

EXHAUSTIVE_PROPERTIES = STATE_PROPERTIES + TRANSITION_PROPERTIES + QUIESCENCE_PROPERTIES
ALL_PROPERTIES = EXHAUSTIVE_PROPERTIES + TRACE_PROPERTIES

DEFAULT_MAX_STATES = 10_000_000
DEFAULT_STEP_CAP = 20_000
DEFAULT_FAIL_PROB = 0.05
DEFAULT_FAIRNESS_WINDOW = 200
DEFAULT_MIN_QUIESCENT = 0.99

_SERVER_BITS = (
    (kernels.I1 | kernels.I2 | kernels.I3 | kernels.I4, "td_invariants"),
    (kernels.TD_EQUIV, "td_equivalence"),
    (kernels.RTD_SUPERSET, "rtd_superset"),
    (kernels.RTD_INVARIANT, "rtd_invariant"),
)
_INV_NAMES = ((kernels.I1, "I1"), (kernels.I2, "I2"), (kernels.I3, "I3"), (kernels.I4, "I4"))


class CheckError(ValueError):
    """Raised for an unknown property name."""


def select_properties(checks: Iterable[str] | None, available: tuple[str, ...]) -> tuple[str, ...]:
    if checks is None:
        return available
    checks = tuple(checks)
    unknown = [c for c in checks if c not in ALL_PROPERTIES]
    if unknown:
        raise CheckError(f"unknown properties: {', '.join(unknown)}")
    return tuple(c for c in available if c in checks)


@dataclass
class Verdict:
    property: str
    status: str = "pass"
    runs: int = 0
    violations: int = 0
    counterexample: dict | None = None

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_json(self) -> dict:
        out = {
            "property": self.property,
            "status": self.status,
            "runs": self.runs,
            "violations": self.violations,
        }
        if self.counterexample is not None:
            out["counterexample"] = self.counterexample
        return out


@dataclass
class Report:
    """Verdicts of one checker run plus mode-specific statistics."""

    mode: str
    verdicts: list[Verdict]
    stats: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    @property
    def failed(self) -> list[Verdict]:
        return [v for v in self.verdicts if v.status == "fail"]

    def verdict(self, name: str) -> Verdict:
        for v in self.verdicts:
            if v.property == name:
                return v
        raise KeyError(name)

    def to_json(self) -> dict:
        return {"mode": self.mode, "stats": self.stats, "verdicts": [v.to_json() for v in self.verdicts]}


def state_fingerprint(state: SystemState) -> bytes:
    return kernels.fingerprint(state.key())


def changed_servers(action: P.Action) -> tuple[int, ...]:
    return (action.p,) if action.op in (P.ABCAST, P.ADELIVER, P.RECEIVE, P.FAIL) else ()


class StepChecker:
    """Evaluates state, transition and quiescence properties.

    Every method returns a list of ``(property, detail)`` pairs.
    """

    def __init__(self, config: Config, checks: Iterable[str]):
        self.config = config
        self.checks = frozenset(checks)
        self._server_bits = [(bit, name) for bit, name in _SERVER_BITS if name in self.checks]
        self._step_kernel = bool({"rtd_monotonic", "removal_trichotomy"} & self.checks)

    def state(self, state: SystemState, servers: Iterable[int] | None = None) -> list[tuple[str, str]]:
        """Global properties, plus tracking properties of ``servers`` (default all)."""
        checks = self.checks
        cfg = self.config
        n = cfg.n
        out = []
        live = state.live
        if "accuracy" in checks:
            for p, detected in enumerate(state.fd):
                if detected & live:
                    out.append(("accuracy", f"server {p} suspects live {members(detected & live)}"))
        if "failure_budget" in checks:
            dead = n - bin(live).count("1")
            if dead != state.failed or dead > cfg.f:
                out.append(("failure_budget", f"{dead} failed, counter {state.failed}, f={cfg.f}"))
        if "integrity" in checks:
            ab = state.ab_mask
            for p, s in enumerate(state.servers):
                if s.nf and s.M & ~ab:
                    out.append(("integrity", f"server {p} knows unbroadcast {members(s.M & ~ab)}"))
        if "set_agreement" in checks:
            delivered = {s.M for s in state.servers if s.nf and s.done}
            if len(delivered) > 1:
                sets = sorted(members(m) for m in delivered)
                out.append(("set_agreement", f"terminated servers disagree: {sets}"))
        if "done_empty" in checks:
            for p, s in enumerate(state.servers):
                if s.done and any(td.nodes for td in s.g):
                    out.append(("done_empty", f"server {p} done with non-empty tracking digraphs"))
        if self._server_bits:
            succ = cfg.G.succ_mask
            for p in range(n) if servers is None else servers:
                s = state.servers[p]
                bits = kernels.server_violations(n, s.M, s.F, s.g, succ)
                for root, b in enumerate(bits):
                    if b:
                        out.extend(self._describe_server(p, root, b))
        return out

    def _describe_server(self, p: int, root: int, bits: int) -> list[tuple[str, str]]:
        out = []
        for bit, name in self._server_bits:
            if bits & bit:
                if name == "td_invariants":
                    which = ",".join(label for b, label in _INV_NAMES if bits & b)
                    out.append((name, f"g[{p}][{root}] breaks {which}"))
                else:
                    out.append((name, f"g[{p}][{root}]"))
        return out

    def transition(self, old: SystemState, action: P.Action, new: SystemState) -> list[tuple[str, str]]:
        checks = self.checks
        out = []
        for p in changed_servers(action):
            a, b = old.servers[p], new.servers[p]
            if "done_stability" in checks and a.done and (a.M, a.F, a.g) != (b.M, b.F, b.g):
                out.append(("done_stability", f"server {p} changed after terminating"))
            if "flags_monotone" in checks and (b.nf > a.nf or b.ab < a.ab or b.done < a.done):
                out.append(("flags_monotone", f"server {p} flags went backwards"))
            if self._step_kernel and (a.M != b.M or a.F != b.F):
                bits = kernels.step_violations(
                    self.config.n, a.M, a.F, a.g, b.M, b.F, b.g, self.config.G.succ_mask
                )
                for root, bit in enumerate(bits):
                    if bit & kernels.RTD_MONOTONIC and "rtd_monotonic" in checks:
                        out.append(("rtd_monotonic", f"RTD of server {p}, root {root} shrank"))
                    if bit & kernels.REMOVAL and "removal_trichotomy" in checks:
                        out.append(("removal_trichotomy", f"g[{p}][{root}] lost a server without cause"))
        return out

    def quiescent(self, state: SystemState) -> list[tuple[str, str]]:
        checks = self.checks
        out = []
        live_servers = [(p, s) for p, s in enumerate(state.servers) if s.nf]
        if "termination" in checks:
            stuck = [p for p, s in live_servers if not s.done]
            if stuck:
                out.append(("termination", f"quiescent with live servers {stuck} not done"))
        if "validity" in checks:
            missing = [p for p, s in live_servers if not s.M >> p & 1]
            if missing:
                out.append(("validity", f"servers {missing} lack their own message"))
        if "completeness" in checks:
            succ = self.config.G.succ_mask
            live = state.live
            for q, s in enumerate(state.servers):
                if not s.nf:
                    undetected = succ[q] & live & ~_column(state.fd, q)
                    if undetected:
                        out.append(("completeness", f"failure of {q} undetected by {members(undetected)}"))
        return out


def _column(fd: tuple[int, ...], q: int) -> int:
    m = 0
    for p, detected in enumerate(fd):
        if detected >> q & 1:
            m |= 1 << p
    return m


class TraceMonitor:
    """Checks properties of an execution rather than of single states.

    It keeps, outside the protocol state, the sender of every message in each
    receive buffer and, per broadcast message, the server each holder first
    received it from. Call :meth:`observe` after every step.
    """

    LOCAL = -1  # sender marker for a detector's own notification

    def __init__(self, state: SystemState, checks: Iterable[str] = TRACE_PROPERTIES):
        n = state.config.n
        self.checks = frozenset(checks) & frozenset(TRACE_PROPERTIES)
        self.succ = state.config.G.succ_mask
        self.inbox = [deque() for _ in range(n)]
        self.in_flight = {}
        # parent[r][p]: server p first received r's message from (LOCAL for r itself)
        self.parent = [[None] * n for _ in range(n)]
        # covered[q][r]: union of all node sets g[q][r] ever had
        self.covered = [[td.nodes for td in s.g] for s in state.servers]

    def observe(self, old: SystemState, action: P.Action, event: tuple, new: SystemState) -> list[tuple[str, str]]:
        kind = event[0]
        out = []
        if kind == "tx":
            _, p, q, m = event
            self.inbox[q].append((p, m))
            self.in_flight[p, q] = self.in_flight.get((p, q), 0) + 1
        elif kind == "detect":
            _, p, q = event
            self.inbox[p].append((self.LOCAL, (Kind.FAIL, p, q)))
        elif kind == "abcast":
            self.parent[event[1]][event[1]] = self.LOCAL
        elif kind == "adeliver":
            if "delivery_tracking" in self.checks:
                out.extend(self._delivery_tracking(new, event[1]))
        elif kind in ("deliver", "recv_bcast", "recv_fail"):
            out.extend(self._received(old, event, new))
        return out

    def _received(self, old, event, new):
        out = []
        kind, p = event[0], event[1]
        if kind == "deliver":
            m = event[2]
            got = (m.kind, m.o, m.t)
        elif kind == "recv_bcast":
            got = (Kind.BCAST, event[2], None)
        else:
            got = (Kind.FAIL, event[2], event[3])
        if not self.inbox[p]:
            if "link_fifo" in self.checks:
                out.append(("link_fifo", f"server {p} received {got} that was never sent"))
            return out
        sender, sent = self.inbox[p].popleft()
        sent = tuple(sent)
        if "link_fifo" in self.checks and sent != got:
            out.append(("link_fifo", f"server {p} received {got} but {sent} was next from {sender}"))
        if sender != self.LOCAL:
            self.in_flight[sender, p] -= 1
        elif "fd_ordering" in self.checks and self.in_flight.get((sent[2], p), 0):
            out.append(("fd_ordering", f"server {p} learned of {sent[2]}'s failure before draining its link"))
        if kind == "recv_bcast":
            o, triggered = event[2], event[3]
            self.parent[o][p] = sender
            if triggered:
                self.parent[p][p] = self.LOCAL
            if "message_path" in self.checks:
                out.extend(self._path_on_receive(new, p, o, sender))
        elif kind == "recv_fail":
            o, t = event[2], event[3]
            s = new.servers[p]
            cov = self.covered[p]
            for r, td in enumerate(s.g):
                cov[r] |= td.nodes
            if "message_path" in self.checks:
                for r in range(len(self.parent)):
                    if self.parent[r][o] == t and not s.M >> r & 1:
                        out.append(
                            ("message_path", f"server {p} got {o}'s notice about {t} before {r}'s message")
                        )
        return out

    def _path_on_receive(self, state, p, o, sender):
        out = []
        if sender == self.LOCAL or not self.succ[sender] >> p & 1:
            out.append(("message_path", f"{o}'s message reached {p} from {sender} off the overlay"))
        elif not state.servers[sender].M >> o & 1:
            out.append(("message_path", f"{sender} relayed {o}'s message to {p} without holding it"))
        for q, s in enumerate(state.servers):
            if s.F[sender] >> p & 1 and not s.M >> o & 1:
                out.append(("message_path", f"server {q} heard {p} report {sender} before {o}'s message"))
        return out

    def _delivery_tracking(self, state, q):
        out = []
        s = state.servers[q]
        for r in range(len(self.parent)):
            if s.M >> r & 1:
                continue
            for p, other in enumerate(state.servers):
                if not other.nf or not other.M >> r & 1:
                    continue
                path = [p]
                while path[-1] != r:
                    path.append(self.parent[r][path[-1]])
                first_live = next(a for a in reversed(path) if state.servers[a].nf)
                if not self.covered[q][r] >> first_live & 1:
                    out.append(("delivery_tracking", f"{q} delivered without ever tracking {first_live} for {r}'s message"))
        return out


def _tally(verdicts: dict[str, Verdict], found: list[tuple[str, str]], counterexample: Callable[[str, str], dict]):
    for name, detail in found:
        v = verdicts[name]
        v.status = "fail"
        v.violations += 1
        if v.counterexample is None:
            v.counterexample = counterexample(name, detail)


def _encode_action(a: P.Action) -> int:
    return (P.OPS.index(a.op) * 64 + a.p) * 65 + (0 if a.q is None else a.q + 1)


def _decode_action(code: int) -> P.Action:
    rest, q = divmod(code, 65)
    op, p = divmod(rest, 64)
    return P.Action(P.OPS[op], p, None if q == 0 else q - 1)


def scenario_dict(config: Config, actions: Iterable[P.Action], **extra) -> dict:
    """A replay scenario (see :mod:`allconcur.scenario`) for ``actions``."""
    out = {"overlay": config.G.to_dict(), "f": config.f, "mode": "replay"}
    flags = {k: True for k in ("inflight_after_fail", "relay_after_done") if getattr(config, k)}
    if flags:
        out["flags"] = flags
    if config.mutant:
        out["mutant"] = config.mutant
    out["actions"] = [a.to_json() for a in actions]
    out.update(extra)
    return out


def explore_exhaustive(
    config: Config,
    checks: Iterable[str] | None = None,
    max_states: int = DEFAULT_MAX_STATES,
    stop_on_violation: bool = False,
    on_quiescent: Callable[[SystemState], None] | None = None,
    progress: Callable[[int, int], None] | None = None,
) -> Report:
    """Breadth-first search over every reachable state.

    States are deduplicated by a 128-bit fingerprint; only the frontier keeps
    full states. Counterexamples are shortest action prefixes. Properties not
    violated when the search stops early (budget or ``stop_on_violation``) are
    reported ``inconclusive``.
    """
    names = select_properties(checks, EXHAUSTIVE_PROPERTIES)
    checker = StepChecker(config, names)
    verdicts = {name: Verdict(name) for name in names}
    init = P.init(config)
    index = {state_fingerprint(init): 0}
    parents = array("q", [-1])
    moves = array("q", [-1])

    def prefix(idx):
        out = []
        while idx > 0:
            out.append(_decode_action(moves[idx]))
            idx = parents[idx]
        return out[::-1]

    def counterexample(idx, extra, fp):
        def make(name, detail):
            actions = prefix(idx) + extra
            return {"fingerprint": fp.hex(), "detail": detail, "scenario": scenario_dict(config, actions)}

        return make

    _tally(verdicts, checker.state(init), counterexample(0, [], state_fingerprint(init)))
    frontier = deque([(init, 0)])
    transitions = quiescent = depth_states = 0
    truncated = stopped = False
    while frontier and not stopped:
        state, idx = frontier.popleft()
        actions = P.enabled_actions(state)
        if all(a.op == P.FAIL for a in actions):
            quiescent += 1
            found = checker.quiescent(state)
            if found:
                _tally(verdicts, found, counterexample(idx, [], state_fingerprint(state)))
            if on_quiescent is not None:
                on_quiescent(state)
        for a in actions:
            new, _ = P.step(state, a)
            transitions += 1
            fp = state_fingerprint(new)
            found = checker.transition(state, a, new)
            j = index.get(fp)
            if j is None:
                if len(index) >= max_states:
                    truncated = True
                    continue
                j = len(index)
                index[fp] = j
                parents.append(idx)
                moves.append(_encode_action(a))
                found += checker.state(new, changed_servers(a))
                frontier.append((new, j))
            if found:
                _tally(verdicts, found, counterexample(idx, [a], fp))
                stopped = stop_on_violation
        if progress is not None and len(index) - depth_states >= 100_000:
            depth_states = len(index)
            progress(len(index), len(frontier))
    complete = not truncated and not stopped
    for v in verdicts.values():
        v.runs = len(index)
        if v.status == "pass" and not complete:
            v.status = "inconclusive"
    stats = {
        "states": len(index),
        "transitions": transitions,
        "quiescent_states": quiescent,
        "complete": complete,
        "max_states": max_states,
    }
    return Report("exhaustive", list(verdicts.values()), stats)


def schedule_seed(seed: int, index: int) -> int:
    """64-bit seed of schedule ``index`` in a campaign seeded with ``seed``."""
    digest = blake2b(f"{seed}:{index}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def _trace_line(step_no: int, action: P.Action, event: tuple) -> str:
    record = {"step": step_no, "action": action.to_json()}
    record.update(P.event_to_json(event))
    return json.dumps(record, separators=(",", ":"))


@dataclass
class Run:
    """One executed schedule."""

    seed: int | None
    actions: list[P.Action]
    final: SystemState
    quiescent: bool
    violations: list[tuple[int, str, str]]
    trace_hash: str
    trace: list[str] | None = None


class _Runner:
    def __init__(self, config: Config, checks: Iterable[str], keep_trace: bool):
        self.config = config
        self.checker = StepChecker(config, checks)
        self.trace_checks = frozenset(checks) & frozenset(TRACE_PROPERTIES)
        self.state = P.init(config)
        self.monitor = TraceMonitor(self.state, self.trace_checks)
        self.actions = []
        self.violations = [(0, name, detail) for name, detail in self.checker.state(self.state)]
        self.hasher = blake2b(digest_size=16)
        self.trace = [] if keep_trace else None

    def apply(self, action: P.Action):
        old = self.state
        new, event = P.step(old, action)
        self.actions.append(action)
        step_no = len(self.actions)
        line = _trace_line(step_no, action, event)
        self.hasher.update(line.encode())
        self.hasher.update(b"\n")
        if self.trace is not None:
            self.trace.append(line)
        found = self.checker.transition(old, action, new)
        found += self.checker.state(new, changed_servers(action))
        if self.trace_checks:
            found += self.monitor.observe(old, action, event, new)
        self.violations.extend((step_no, name, detail) for name, detail in found)
        self.state = new
        return event

    def finish(self, seed):
        quiescent = not P.protocol_actions(self.state)
        if quiescent:
            step_no = len(self.actions)
            self.violations.extend((step_no, n, d) for n, d in self.checker.quiescent(self.state))
        return Run(seed, self.actions, self.state, quiescent, self.violations, self.hasher.hexdigest(), self.trace)


def run_schedule(
    config: Config,
    seed: int,
    checks: Iterable[str] | None = None,
    step_cap: int = DEFAULT_STEP_CAP,
    fail_prob: float = DEFAULT_FAIL_PROB,
    fairness: bool = True,
    fairness_window: int = DEFAULT_FAIRNESS_WINDOW,
    keep_trace: bool = False,
) -> Run:
    """Run one random schedule until quiescence or ``step_cap`` steps.

    While the failure budget lasts, each step fails a random live server with
    probability ``fail_prob``; otherwise a uniformly random enabled protocol
    action is taken. In fairness mode an action that has stayed enabled for
    ``fairness_window`` consecutive steps is taken first (oldest first).
    """
    names = select_properties(checks, ALL_PROPERTIES)
    runner = _Runner(config, names, keep_trace)
    rng = random.Random(seed)
    enabled_since = {}
    for step_no in range(step_cap):
        actions = P.enabled_actions(runner.state)
        fails = [a for a in actions if a.op == P.FAIL]
        others = [a for a in actions if a.op != P.FAIL]
        if not others:
            break
        if fails and rng.random() < fail_prob:
            choice = rng.choice(fails)
        else:
            choice = None
            if fairness:
                enabled_since = {a: enabled_since.get(a, step_no) for a in others}
                oldest = min(others, key=enabled_since.__getitem__)
                if step_no - enabled_since[oldest] >= fairness_window:
                    choice = oldest
            if choice is None:
                choice = rng.choice(others)
        enabled_since.pop(choice, None)
        runner.apply(choice)
    return runner.finish(seed)


def fuzz_schedules(
    config: Config,
    n_schedules: int,
    seed: int,
    checks: Iterable[str] | None = None,
    step_cap: int = DEFAULT_STEP_CAP,
    fail_prob: float = DEFAULT_FAIL_PROB,
    fairness: bool = True,
    fairness_window: int = DEFAULT_FAIRNESS_WINDOW,
    min_quiescent: float = DEFAULT_MIN_QUIESCENT,
    stop_on_violation: bool = False,
) -> Report:
    """Run ``n_schedules`` seeded schedules and merge verdicts by schedule index.

    Besides one verdict per property, a ``quiescence`` verdict fails when
    fewer than ``min_quiescent`` of the schedules reach quiescence.
    """
    config.validate()
    names = select_properties(checks, ALL_PROPERTIES)
    verdicts = {name: Verdict(name) for name in names}
    quiet = Verdict("quiescence")
    campaign = blake2b(digest_size=16)
    ran = 0
    for i in range(n_schedules):
        s = schedule_seed(seed, i)
        run = run_schedule(config, s, names, step_cap, fail_prob, fairness, fairness_window)
        ran += 1
        campaign.update(bytes.fromhex(run.trace_hash))
        if not run.quiescent:
            quiet.violations += 1
            if quiet.counterexample is None:
                quiet.counterexample = {"schedule": i, "seed": s, "steps": len(run.actions)}
        first = {}
        for step_no, name, detail in run.violations:
            first.setdefault(name, (step_no, detail))
        for name, (step_no, detail) in first.items():
            v = verdicts[name]
            v.status = "fail"
            v.violations += 1
            if v.counterexample is None:
                v.counterexample = {
                    "schedule": i,
                    "seed": s,
                    "step": step_no,
                    "detail": detail,
                    "scenario": scenario_dict(config, run.actions[:step_no]),
                }
        if first and stop_on_violation:
            break
    for v in verdicts.values():
        v.runs = ran
        if v.status == "pass" and ran < n_schedules:
            v.status = "inconclusive"
    quiet.runs = ran
    if ran and (ran - quiet.violations) / ran < min_quiescent:
        quiet.status = "fail"
    stats = {
        "schedules": ran,
        "seed": seed,
        "quiescent": ran - quiet.violations,
        "step_cap": step_cap,
        "fail_prob": fail_prob,
        "fairness": fairness,
        "trace_digest": campaign.hexdigest(),
    }
    return Report("fuzz", [*verdicts.values(), quiet], stats)


class ReplayError(ValueError):
    """A scenario action was not enabled at its position."""


def replay_scenario(scenario, checks: Iterable[str] | None = None, drain_cap: int = 1_000_000):
    """Apply a scenario's actions in order; returns ``(trace, report)``.

    ``trace`` is the list of JSONL lines. Assertions are evaluated after their
    step; safety properties on every state; quiescence properties only when
    the final state is quiescent.
    """
    from .scenario import DRAIN, normalize, observe

    config = scenario.config
    if checks is None:
        checks = scenario.checks
    names = select_properties(checks, ALL_PROPERTIES)
    runner = _Runner(config, names, keep_trace=True)
    events = []
    assertion_verdict = Verdict("assertions")
    pending = {}
    for a in scenario.assertions:
        pending.setdefault(len(scenario.actions) if a.after_step is None else a.after_step, []).append(a)

    def check_assertions(position):
        for a in pending.get(position, ()):
            assertion_verdict.runs += 1
            actual = normalize(observe(runner.state, a.kind, a.args, events))
            if actual != normalize(a.expected):
                assertion_verdict.status = "fail"
                assertion_verdict.violations += 1
                if assertion_verdict.counterexample is None:
                    assertion_verdict.counterexample = {
                        "assertion": a.to_json(),
                        "actual": actual,
                        "scenario": scenario_dict(config, runner.actions),
                    }

    def take(action, position):
        try:
            event = runner.apply(action)
        except StepDisabled as exc:
            raise ReplayError(f"actions[{position}] {action} is not enabled: {exc}") from None
        events.append(P.event_to_json(event))

    check_assertions(0)
    for i, item in enumerate(scenario.actions):
        if item == DRAIN:
            for _ in range(drain_cap):
                actions = P.protocol_actions(runner.state)
                if not actions:
                    break
                take(actions[0], i)
            else:
                raise ReplayError(f"actions[{i}] Drain did not reach quiescence in {drain_cap} steps")
        else:
            take(item, i)
        check_assertions(i + 1)
    run = runner.finish(None)
    available = [n for n in names if n not in QUIESCENCE_PROPERTIES or run.quiescent]
    verdicts = {name: Verdict(name, runs=1) for name in available}
    first = {}
    for step_no, name, detail in run.violations:
        first.setdefault(name, (step_no, detail))
    for name, (step_no, detail) in first.items():
        v = verdicts[name]
        v.status = "fail"
        v.violations = 1
        v.counterexample = {
            "step": step_no,
            "detail": detail,
            "scenario": scenario_dict(config, run.actions[:step_no]),
        }
    out = list(verdicts.values())
    if scenario.assertions:
        out.append(assertion_verdict)
    stats = {"steps": len(run.actions), "quiescent": run.quiescent, "trace_hash": run.trace_hash}
    return run.trace, Report("replay", out, stats)
