"""Atomic broadcast module: per-server operators and the global step relation.

Each operator takes a :class:`SystemState` and returns a new one, raising
:class:`StepDisabled` outside its precondition. :func:`step` applies an
:class:`Action` and also reports a trace event; :func:`enabled_actions`
lists every action whose precondition holds, in a fixed order.
"""

from __future__ import annotations

from typing import NamedTuple

from . import fd as _fd
from . import kernels
from .net import Kind, Message, NetState, StepDisabled, bcast, deliver_msg, send_msg, tx_msg
from .state import Config, ServerState, SystemState
from .tracking import TrackingDigraph, members, td_init

ABCAST = "Abcast"
ADELIVER = "Adeliver"
RECEIVE = "ReceiveMessage"
TX = "TXMsg"
FAIL = "Fail"
DETECT = "DetectFail"
OPS = (ABCAST, ADELIVER, RECEIVE, TX, FAIL, DETECT)
_TWO_ARG = (TX, DETECT)


class Action(NamedTuple):
    op: str
    p: int
    q: int | None = None

    def to_json(self) -> list:
        return [self.op, self.p] if self.q is None else [self.op, self.p, self.q]

    @classmethod
    def from_json(cls, item) -> "Action":
        if not isinstance(item, (list, tuple)) or not item or item[0] not in OPS:
            raise ValueError(f"not an action: {item!r}")
        op, *args = item
        if not all(isinstance(a, int) for a in args):
            raise ValueError(f"action arguments must be integers: {item!r}")
        if op == DETECT and len(args) != 2:
            raise ValueError(f"{op} takes two servers: {item!r}")
        if op == TX and len(args) not in (1, 2):
            raise ValueError(f"{op} takes a sender and optionally a destination: {item!r}")
        if op not in _TWO_ARG and len(args) != 1:
            raise ValueError(f"{op} takes one server: {item!r}")
        return cls(op, *args)

    def __str__(self):
        return f"{self.op}({self.p})" if self.q is None else f"{self.op}({self.p},{self.q})"


def _put(seq: tuple, i: int, value) -> tuple:
    return seq[:i] + (value,) + seq[i + 1 :]


def init(config: Config) -> SystemState:
    config.validate()
    n = config.n
    zero = (0,) * n
    g = tuple(td_init(n, q) for q in range(n))
    server = ServerState(0, zero, g, True, False, False)
    return SystemState(config, (server,) * n, NetState.empty(n), zero, 0)


def _with(state: SystemState, p: int, server: ServerState, net: NetState) -> SystemState:
    return SystemState(state.config, _put(state.servers, p, server), net, state.fd, state.failed)


def _broadcast_own(server: ServerState, p: int, n: int) -> ServerState:
    return server._replace(
        M=server.M | 1 << p, g=_put(server.g, p, TrackingDigraph(0, (0,) * n)), ab=True
    )


def can_abcast(state: SystemState, p: int) -> bool:
    s = state.servers[p]
    return s.nf and not s.ab


def abcast(state: SystemState, p: int) -> SystemState:
    if not can_abcast(state, p):
        raise StepDisabled(f"Abcast({p}) not enabled")
    cfg = state.config
    server = _broadcast_own(state.servers[p], p, cfg.n)
    net = send_msg(state.net, p, (bcast(p),), state.live, cfg.G)
    return _with(state, p, server, net)


def can_adeliver(state: SystemState, p: int) -> bool:
    s = state.servers[p]
    if not (s.nf and s.ab and not s.done):
        return False
    if state.config.mutant == "early_deliver":
        return True
    return not any(td.nodes for td in s.g)


def adeliver(state: SystemState, p: int) -> SystemState:
    """Terminate ``p``; it delivers ``delivery_order(state, p)``."""
    if not can_adeliver(state, p):
        raise StepDisabled(f"Adeliver({p}) not enabled")
    return _with(state, p, state.servers[p]._replace(done=True), state.net)


def delivery_order(state: SystemState, p: int) -> list[int]:
    return members(state.servers[p].M)


def recv_bcast(state: SystemState, p: int, m: Message) -> SystemState:
    return _recv_bcast(state, p, m)[0]


def _recv_bcast(state: SystemState, p: int, m: Message):
    cfg = state.config
    server = state.servers[p]
    if server.M >> m.o & 1 or not state.servers[m.o].ab:
        raise StepDisabled(f"RecvBCAST({p}, {m.o}) not enabled")
    n = cfg.n
    server = server._replace(M=server.M | 1 << m.o, g=_put(server.g, m.o, TrackingDigraph(0, (0,) * n)))
    out = [m]
    triggered = not server.ab
    if triggered:
        server = _broadcast_own(server, p, n)
        out.append(bcast(p))
    net = send_msg(state.net, p, out, state.live, cfg.G)
    return _with(state, p, server, net), ("recv_bcast", p, m.o, triggered)


def recv_fail(state: SystemState, p: int, m: Message) -> SystemState:
    return _recv_fail(state, p, m)[0]


def _recv_fail(state: SystemState, p: int, m: Message):
    cfg = state.config
    server = state.servers[p]
    o, t = m.o, m.t
    if server.F[t] >> o & 1:
        raise StepDisabled(f"RecvFAIL({p}, {o}, {t}) not enabled")
    F = _put(server.F, t, server.F[t] | 1 << o)
    n = cfg.n
    succ = cfg.G.succ_mask
    keep_owner = cfg.mutant == "keep_owner"
    g = list(server.g)
    for root, td in enumerate(g):
        if td.nodes >> t & 1:
            g[root] = TrackingDigraph(*kernels.td_update(n, td.nodes, td.adj, root, o, t, F, succ, keep_owner))
    server = server._replace(F=F, g=tuple(g))
    net = state.net
    if cfg.mutant != "no_fail_forward":
        net = send_msg(net, p, (m,), state.live, cfg.G)
    return _with(state, p, server, net), ("recv_fail", p, o, t)


def can_receive(state: SystemState, p: int) -> bool:
    return state.servers[p].nf and bool(state.net.recv_buf[p])


def receive_message(state: SystemState, p: int) -> SystemState:
    return _receive(state, p)[0]


def _receive(state: SystemState, p: int):
    if not can_receive(state, p):
        raise StepDisabled(f"ReceiveMessage({p}) not enabled")
    net, m = deliver_msg(state.net, p)
    popped = SystemState(state.config, state.servers, net, state.fd, state.failed)
    server = state.servers[p]
    if server.done and not state.config.relay_after_done:
        return popped, ("deliver", p, m)
    if m.kind == Kind.BCAST:
        if server.M >> m.o & 1:
            return popped, ("deliver", p, m)
        return _recv_bcast(popped, p, m)
    if server.F[m.t] >> m.o & 1:
        return popped, ("deliver", p, m)
    return _recv_fail(popped, p, m)


def can_tx(state: SystemState, p: int) -> bool:
    return bool(state.net.send_buf[p]) and (state.servers[p].nf or state.config.inflight_after_fail)


def tx(state: SystemState, p: int, q: int | None = None) -> SystemState:
    if not can_tx(state, p):
        raise StepDisabled(f"TXMsg({p}) not enabled")
    net = tx_msg(state.net, p, q)
    return SystemState(state.config, state.servers, net, state.fd, state.failed)


def can_fail(state: SystemState, p: int) -> bool:
    return state.servers[p].nf and state.failed < state.config.f


def fail(state: SystemState, p: int) -> SystemState:
    if not can_fail(state, p):
        raise StepDisabled(f"Fail({p}) not enabled")
    server = state.servers[p]._replace(nf=False)
    return SystemState(state.config, _put(state.servers, p, server), state.net, state.fd, state.failed + 1)


def step(state: SystemState, action: Action):
    """Apply ``action``; returns ``(new_state, event)`` with ``event`` a plain tuple."""
    op, p, q = action
    if op == RECEIVE:
        return _receive(state, p)
    if op == TX:
        if not can_tx(state, p):
            raise StepDisabled(f"TXMsg({p}) not enabled")
        head = state.net.send_buf[p][0]
        dest = head.dests[0] if q is None else q
        return tx(state, p, dest), ("tx", p, dest, head.msg)
    if op == ABCAST:
        return abcast(state, p), ("abcast", p)
    if op == ADELIVER:
        new = adeliver(state, p)
        return new, ("adeliver", p, tuple(delivery_order(new, p)))
    if op == FAIL:
        return fail(state, p), ("fail", p)
    if op == DETECT:
        return _fd.detect_fail(state, p, q), ("detect", p, q)
    raise ValueError(f"unknown action {action!r}")


def apply(state: SystemState, action: Action) -> SystemState:
    return step(state, action)[0]


def enabled_actions(state: SystemState) -> list[Action]:
    """Enabled actions ordered by operator (as in ``OPS``), then parameters."""
    cfg = state.config
    servers = state.servers
    n = cfg.n
    send_buf = state.net.send_buf
    recv_buf = state.net.recv_buf
    abc, adl, rcv, txs, fls, det = [], [], [], [], [], []
    budget = state.failed < cfg.f
    early = cfg.mutant == "early_deliver"
    inflight = cfg.inflight_after_fail
    succ = cfg.G.succ_mask
    dead = 0
    for p in range(n):
        if not servers[p].nf:
            dead |= 1 << p
    for p in range(n):
        s = servers[p]
        if s.nf:
            if not s.ab:
                abc.append(Action(ABCAST, p))
            elif not s.done and (early or not any(td.nodes for td in s.g)):
                adl.append(Action(ADELIVER, p))
            if recv_buf[p]:
                rcv.append(Action(RECEIVE, p))
            if budget:
                fls.append(Action(FAIL, p))
        if send_buf[p] and (s.nf or inflight):
            for q in send_buf[p][0].dests:
                txs.append(Action(TX, p, q))
    if dead:
        for p in range(n):
            if not servers[p].nf:
                continue
            for q in range(n):
                if dead >> q & 1 and succ[q] >> p & 1 and not state.fd[p] >> q & 1:
                    det.append(Action(DETECT, p, q))
    return abc + adl + rcv + txs + fls + det


def protocol_actions(state: SystemState) -> list[Action]:
    """Enabled actions other than ``Fail``; empty means the run is quiescent."""
    return [a for a in enabled_actions(state) if a.op != FAIL]


def event_to_json(event: tuple) -> dict:
    kind = event[0]
    if kind == "abcast":
        return {"event": kind, "p": event[1]}
    if kind == "adeliver":
        return {"event": kind, "p": event[1], "order": list(event[2])}
    if kind == "recv_bcast":
        return {"event": kind, "p": event[1], "o": event[2], "triggered_abcast": event[3]}
    if kind == "recv_fail":
        return {"event": kind, "p": event[1], "o": event[2], "t": event[3]}
    if kind == "deliver":
        return {"event": kind, "at": event[1], "msg": event[2].to_json()}
    if kind == "tx":
        return {"event": kind, "from": event[1], "to": event[2], "msg": event[3].to_json()}
    if kind == "fail":
        return {"event": kind, "p": event[1]}
    if kind == "detect":
        return {"event": kind, "by": event[1], "failed": event[2]}
    raise ValueError(f"unknown event {event!r}")
