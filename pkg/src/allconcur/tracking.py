"""Tracking digraphs: incremental maintenance, construction from scratch, invariants.

A tracking digraph ``g[p][r]`` is server ``p``'s hypothesis about which servers
may hold the message broadcast by ``r`` (the root), and over which edges it may
have travelled. Failure knowledge of ``p`` is a tuple ``F`` where ``F[q]`` is the
bitmask of servers from which ``p`` received a notification of ``q``'s failure.

The heavy lifting lives in :mod:`allconcur.kernels`; this module wraps it in a
readable API with set-valued helpers.
"""

from __future__ import annotations

from typing import Iterable, Mapping, NamedTuple

from . import kernels
from .overlay import Digraph

I1, I2, I3, I4 = kernels.I1, kernels.I2, kernels.I3, kernels.I4
_INVARIANT_NAMES = {I1: "I1", I2: "I2", I3: "I3", I4: "I4"}


def mask(items: Iterable[int]) -> int:
    m = 0
    for x in items:
        m |= 1 << x
    return m


def members(m: int) -> list[int]:
    out = []
    while m:
        low = m & -m
        out.append(low.bit_length() - 1)
        m ^= low
    return out


class TrackingDigraph(NamedTuple):
    nodes: int
    adj: tuple[int, ...]

    @property
    def is_empty(self) -> bool:
        return not self.nodes

    def node_set(self) -> set[int]:
        return set(members(self.nodes))

    def edge_set(self) -> set[tuple[int, int]]:
        return {(u, v) for u, out in enumerate(self.adj) for v in members(out)}

    def to_digraph(self) -> Digraph:
        return Digraph(frozenset(self.node_set()), frozenset(self.edge_set()))

    def to_dict(self, root: int) -> dict:
        return {
            "root": root,
            "nodes": sorted(self.node_set()),
            "edges": [list(e) for e in sorted(self.edge_set())],
        }


def empty(n: int) -> TrackingDigraph:
    return TrackingDigraph(0, (0,) * n)


def failure_view(n: int, notices: Mapping[int, Iterable[int]] | None = None) -> tuple[int, ...]:
    """``F`` tuple from ``{failed server: senders of its failure notifications}``."""
    F = [0] * n
    for q, senders in (notices or {}).items():
        F[q] = mask(senders)
    return tuple(F)


def td_init(n: int, root: int) -> TrackingDigraph:
    return TrackingDigraph(1 << root, (0,) * n)


def td_update_recursive(
    td: TrackingDigraph,
    root: int,
    notice: tuple[int, int],
    F: tuple[int, ...],
    G: Digraph,
    has_msg: bool = False,
    keep_owner: bool = False,
) -> TrackingDigraph:
    """Apply the notification ``notice = (owner, target)`` to ``td``.

    ``F`` must already contain the notification. A repeat notification for a
    target whose successors are already tracked drops the edge to the sender
    and prunes what became unreachable; a first notification expands the
    digraph breadth-first from the target. The result is emptied when every
    remaining server is known to have failed.

    ``keep_owner`` disables the exclusion of the notification's sender from
    the expansion; it exists only to build a deliberately broken protocol.
    """
    n = len(F)
    if has_msg:
        return empty(n)
    o, t = notice
    nodes, adj = kernels.td_update(n, td.nodes, td.adj, root, o, t, F, G.succ_mask, keep_owner)
    return TrackingDigraph(nodes, adj)


def td_build(root: int, F: tuple[int, ...], G: Digraph) -> TrackingDigraph:
    """Tracking digraph rebuilt from failure knowledge alone.

    Keeps the root and every server reachable from it through servers known
    to have failed, along edges not excluded by a received notification.
    """
    nodes, adj = kernels.td_build(len(F), root, F, G.succ_mask)
    return TrackingDigraph(nodes, adj)


def check_td_invariants(td: TrackingDigraph, root: int, F: tuple[int, ...], G: Digraph) -> list[str]:
    bits = kernels.td_violations(len(F), root, td.nodes, td.adj, F, G.succ_mask)
    return [name for bit, name in _INVARIANT_NAMES.items() if bits & bit]


def rtd_build(root: int, F: tuple[int, ...], has_msg: bool, G: Digraph) -> TrackingDigraph:
    """Reconstructed tracking digraph: grow-only over-approximation of ``g[p][root]``."""
    nodes, adj = kernels.rtd_build(len(F), root, F, bool(has_msg), G.succ_mask)
    return TrackingDigraph(nodes, adj)


def rtd_invariant_holds(
    td: TrackingDigraph, root: int, F: tuple[int, ...], has_msg: bool, G: Digraph
) -> bool:
    if has_msg:
        return True
    rtd = rtd_build(root, F, False, G)
    failed = kernels.failed_mask(F)
    return not (rtd.nodes & ~td.nodes & ~failed & kernels.reach(rtd.adj, root))


def check_rtd_invariant(state, p: int, root: int) -> bool:
    server = state.servers[p]
    return rtd_invariant_holds(
        server.g[root], root, server.F, bool(server.M >> root & 1), state.config.G
    )
