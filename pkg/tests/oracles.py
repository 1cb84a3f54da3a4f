"""Brute-force reference implementations used only by the tests.

They share no code with the package: sets and explicit path enumeration
instead of bitmasks and worklists.
"""

from itertools import combinations


def succ_sets(n, edges):
    out = {u: set() for u in range(n)}
    for u, v in edges:
        out[u].add(v)
    return out


def reachable(n, edges, src, removed=frozenset()):
    succ = succ_sets(n, edges)
    seen = {src}
    stack = [src]
    while stack:
        u = stack.pop()
        for v in succ[u]:
            if v not in seen and v not in removed:
                seen.add(v)
                stack.append(v)
    return seen


def min_node_cut(n, edges):
    """Smallest set whose removal leaves some ordered pair unreachable; n - 1 if none."""
    nodes = range(n)
    for size in range(n - 1):
        for cut in combinations(nodes, size):
            cut = frozenset(cut)
            rest = [u for u in nodes if u not in cut]
            for u in rest:
                if len(reachable(n, edges, u, cut)) < len(rest):
                    return size
    return n - 1


def bfs_diameter(n, edges, removed=frozenset()):
    succ = succ_sets(n, edges)
    worst = 0
    for src in range(n):
        if src in removed:
            continue
        dist = {src: 0}
        frontier = [src]
        while frontier:
            nxt = []
            for u in frontier:
                for v in succ[u]:
                    if v not in dist and v not in removed:
                        dist[v] = dist[u] + 1
                        nxt.append(v)
            frontier = nxt
        if len(dist) < n - len(removed):
            return None
        worst = max(worst, max(dist.values()))
    return worst


def knbar_edges(n, F, succ):
    """Edges of the complete digraph that satisfy I3 under failure view ``F``."""
    return {(x, y) for x in range(n) for y in range(n) if x != y and F[x] and y in succ[x] and y not in F[x]}


def simple_paths(n, edges, src):
    """Every simple path starting at ``src`` (including the trivial one)."""
    succ = succ_sets(n, edges)
    out = []

    def walk(path):
        out.append(tuple(path))
        for v in sorted(succ[path[-1]]):
            if v not in path:
                path.append(v)
                walk(path)
                path.pop()

    walk([src])
    return out


def failure_path_exists(n, root, q, F, succ):
    """Membership predicate: a path root..q whose servers before q are all known failed."""
    edges = knbar_edges(n, F, succ)
    return any(p[-1] == q and all(F[x] for x in p[:-1]) for p in simple_paths(n, edges, root))


def td_reference(n, root, F, succ):
    """(nodes, edges) of the tracking digraph by path enumeration plus complete pruning."""
    nodes = {q for q in range(n) if q == root or failure_path_exists(n, root, q, F, succ)}
    if all(F[q] for q in nodes):
        return set(), set()
    edges = {(x, y) for (x, y) in knbar_edges(n, F, succ) if x in nodes and y in nodes}
    return nodes, edges


def rtd_reference(n, root, F, has_msg, succ):
    nodes = {root}
    changed = True
    while changed:
        changed = False
        for t in list(nodes):
            if F[t] and not succ[t] <= nodes:
                nodes |= succ[t]
                changed = True
    edges = {
        (x, y)
        for x in nodes
        if F[x]
        for y in succ[x]
        if y in nodes and (has_msg or y not in F[x])
    }
    return nodes, edges
