"""Perfect failure detector with local detection.

A live successor of a failed server may detect the failure once; the
resulting notification goes to the end of the detector's own receive buffer,
behind anything the failed server had already transmitted to it.
"""

from __future__ import annotations

from .net import StepDisabled, append_recv, fail_notice
from .state import SystemState


def can_detect(state: SystemState, p: int, q: int) -> bool:
    servers = state.servers
    return (
        servers[p].nf
        and not servers[q].nf
        and bool(state.config.G.succ_mask[q] >> p & 1)
        and not state.fd[p] >> q & 1
    )


def detect_fail(state: SystemState, p: int, q: int) -> SystemState:
    if not can_detect(state, p, q):
        raise StepDisabled(f"DetectFail({p}, {q}) not enabled")
    fd = state.fd[:p] + (state.fd[p] | 1 << q,) + state.fd[p + 1 :]
    net = append_recv(state.net, p, fail_notice(p, q))
    return SystemState(state.config, state.servers, net, fd, state.failed)


def accuracy_holds(state: SystemState) -> bool:
    live = state.live
    return not any(detected & live for detected in state.fd)
