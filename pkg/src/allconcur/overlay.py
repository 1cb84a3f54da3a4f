"""Directed-graph primitives and overlay generators.

Nodes are dense integers ``0..n-1``. Besides the explicit node and edge sets,
a :class:`Digraph` caches per-node successor bitmasks; the protocol and the
tracking kernels work on those masks.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class Digraph:
    nodes: frozenset[int]
    edges: frozenset[tuple[int, int]]
    succ_mask: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for u, v in self.edges:
            if u not in self.nodes or v not in self.nodes:
                raise GraphError(f"edge ({u}, {v}) has an endpoint outside the node set")
        size = max(self.nodes) + 1 if self.nodes else 0
        masks = [0] * size
        for u, v in self.edges:
            masks[u] |= 1 << v
        object.__setattr__(self, "succ_mask", tuple(masks))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Iterable[int]]) -> "Digraph":
        return cls(frozenset(range(n)), frozenset((int(u), int(v)) for u, v in edges))

    @property
    def n(self) -> int:
        return len(self.nodes)

    def has_self_loops(self) -> bool:
        return any(u == v for u, v in self.edges)

    def out_degree(self, p: int) -> int:
        return len(successors(self, p))

    def to_dict(self) -> dict:
        return {"nodes": self.n, "edges": [list(e) for e in sorted(self.edges)]}


def _check_node(G: Digraph, p: int) -> None:
    if p not in G.nodes:
        raise GraphError(f"unknown node {p}")


def successors(G: Digraph, p: int) -> frozenset[int]:
    _check_node(G, p)
    return frozenset(v for u, v in G.edges if u == p)


def predecessors(G: Digraph, p: int) -> frozenset[int]:
    _check_node(G, p)
    return frozenset(u for u, v in G.edges if v == p)


def make_circulant(n: int, offsets: Iterable[int]) -> Digraph:
    """Digraph on ``0..n-1`` with an edge ``(i, (i + s) % n)`` per offset ``s``."""
    offsets = sorted(set(offsets))
    if n < 2:
        raise GraphError("circulant needs n >= 2")
    if not offsets:
        raise GraphError("circulant needs at least one offset")
    for s in offsets:
        if not 1 <= s < n:
            raise GraphError(f"offset {s} outside [1, {n})")
    return Digraph.from_edges(n, ((i, (i + s) % n) for i in range(n) for s in offsets))


def complete_digraph(n: int) -> Digraph:
    return make_circulant(n, range(1, n)) if n > 1 else Digraph(frozenset({0}), frozenset())


def parse_graph(literal: dict) -> Digraph:
    """Build a digraph from ``{"nodes": n, "edges": [...]}`` or ``{"circulant": {...}}``."""
    if not isinstance(literal, dict):
        raise GraphError("overlay must be a JSON object")
    if "circulant" in literal:
        spec = literal["circulant"]
        try:
            return make_circulant(int(spec["n"]), [int(s) for s in spec["offsets"]])
        except (KeyError, TypeError) as exc:
            raise GraphError(f"circulant overlay needs 'n' and 'offsets': {exc}") from None
    if "nodes" in literal:
        n = literal["nodes"]
        if not isinstance(n, int) or n < 1:
            raise GraphError("'nodes' must be a positive integer")
        edges = literal.get("edges", [])
        for i, e in enumerate(edges):
            if not (isinstance(e, (list, tuple)) and len(e) == 2):
                raise GraphError(f"edges[{i}] must be a [u, v] pair")
            if not all(isinstance(x, int) and 0 <= x < n for x in e):
                raise GraphError(f"edges[{i}] = {e} references a node outside [0, {n})")
        return Digraph.from_edges(n, edges)
    raise GraphError("overlay needs either 'nodes' or 'circulant'")


def has_path(G: Digraph, u: int, v: int) -> bool:
    _check_node(G, u)
    _check_node(G, v)
    return bool(reachable_mask(G.succ_mask, u) >> v & 1)


def reachable_mask(succ: tuple[int, ...], u: int, removed: int = 0) -> int:
    """Bitmask of nodes reachable from ``u`` (``u`` included), avoiding ``removed``."""
    seen = 1 << u
    frontier = seen
    while frontier:
        nxt = 0
        while frontier:
            low = frontier & -frontier
            nxt |= succ[low.bit_length() - 1]
            frontier ^= low
        nxt &= ~seen & ~removed
        seen |= nxt
        frontier = nxt
    return seen


def _max_disjoint_paths(G: Digraph, s: int, t: int) -> int:
    # node-split: x_in = 2x, x_out = 2x + 1, unit capacity inside each node
    n = max(G.nodes) + 1
    cap: dict[tuple[int, int], int] = {}
    adj: list[list[int]] = [[] for _ in range(2 * n)]

    def arc(a: int, b: int, c: int) -> None:
        if (a, b) not in cap:
            adj[a].append(b)
            adj[b].append(a)
            cap.setdefault((b, a), 0)
        cap[(a, b)] = cap.get((a, b), 0) + c

    big = n
    for x in G.nodes:
        arc(2 * x, 2 * x + 1, big if x in (s, t) else 1)
    for u, v in G.edges:
        arc(2 * u + 1, 2 * v, big)

    src, sink = 2 * s + 1, 2 * t
    flow = 0
    while True:
        parent = {src: src}
        queue = deque([src])
        while queue and sink not in parent:
            a = queue.popleft()
            for b in adj[a]:
                if b not in parent and cap[(a, b)] > 0:
                    parent[b] = a
                    queue.append(b)
        if sink not in parent:
            return flow
        b = sink
        while b != src:
            a = parent[b]
            cap[(a, b)] -= 1
            cap[(b, a)] += 1
            b = a
        flow += 1


def vertex_connectivity(G: Digraph) -> int:
    """Minimum number of internally node-disjoint paths over non-adjacent ordered pairs.

    Adjacent pairs cannot be separated by node removal; a complete digraph on
    ``n`` nodes gets ``n - 1``.
    """
    if G.n < 2:
        raise GraphError("vertex connectivity needs at least 2 nodes")
    pairs = [(u, v) for u in G.nodes for v in G.nodes if u != v and (u, v) not in G.edges]
    if not pairs:
        return G.n - 1
    return min(_max_disjoint_paths(G, u, v) for u, v in pairs)


def brute_force_connectivity(G: Digraph) -> int:
    """Reference value: smallest node set whose removal disconnects some ordered pair.

    Graphs where no removal disconnects anything (complete digraphs) get ``n - 1``.
    """
    if G.n < 2:
        raise GraphError("vertex connectivity needs at least 2 nodes")
    nodes = sorted(G.nodes)
    for k in range(G.n - 1):
        for cut in combinations(nodes, k):
            removed = sum(1 << x for x in cut)
            rest = [x for x in nodes if not removed >> x & 1]
            for u in rest:
                reach = reachable_mask(G.succ_mask, u, removed)
                if any(not reach >> v & 1 for v in rest):
                    return k
    return G.n - 1


def _diameter(G: Digraph, removed: int = 0) -> int:
    succ = G.succ_mask
    alive = [x for x in sorted(G.nodes) if not removed >> x & 1]
    alive_mask = sum(1 << x for x in alive)
    worst = 0
    for u in alive:
        seen = 1 << u
        frontier = seen
        depth = 0
        while frontier:
            nxt = 0
            while frontier:
                low = frontier & -frontier
                nxt |= succ[low.bit_length() - 1]
                frontier ^= low
            nxt &= ~seen & ~removed
            if nxt:
                depth += 1
            seen |= nxt
            frontier = nxt
        if seen & alive_mask != alive_mask:
            raise GraphError("graph is not strongly connected")
        worst = max(worst, depth)
    return worst


def diameter(G: Digraph) -> int:
    return _diameter(G)


def fault_diameter(G: Digraph, f: int) -> int:
    """Largest diameter over all ways of removing exactly ``f`` nodes (exhaustive)."""
    if f < 0:
        raise GraphError("f must be non-negative")
    if vertex_connectivity(G) <= f:
        raise GraphError(f"vertex connectivity must exceed f={f}")
    return max(_diameter(G, sum(1 << x for x in cut)) for cut in combinations(sorted(G.nodes), f))
