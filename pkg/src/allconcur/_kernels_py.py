"""Pure-Python tracking-digraph kernels.

Every set of servers is an int bitmask. A digraph is ``(nodes, adj)`` with
``adj[x]`` the successor mask of ``x``. ``F[q]`` is the mask of servers that
sent a notification of ``q``'s failure. ``_kernels.pyx`` mirrors this module
function for function.
"""

from array import array
from collections import deque
from hashlib import blake2b

# violation bits returned by td_violations / server_violations
I1 = 1
I2 = 2
I3 = 4
I4 = 8
TD_EQUIV = 16
RTD_SUPERSET = 32
RTD_INVARIANT = 64
# bits returned by step_violations
RTD_MONOTONIC = 1
REMOVAL = 2


def failed_mask(F):
    m = 0
    for q, senders in enumerate(F):
        if senders:
            m |= 1 << q
    return m


def _bits(mask):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def reach(adj, root):
    seen = 1 << root
    frontier = seen
    while frontier:
        nxt = 0
        for x in _bits(frontier):
            nxt |= adj[x]
        frontier = nxt & ~seen
        seen |= frontier
    return seen


def td_reach(n, root, F, succ):
    """Servers connected to ``root`` through known failures (no pruning)."""
    fm = failed_mask(F)
    seen = 1 << root
    frontier = seen & fm
    while frontier:
        nxt = 0
        for x in _bits(frontier):
            nxt |= succ[x] & ~F[x]
        new = nxt & ~seen
        seen |= new
        frontier = new & fm
    return seen


def td_build(n, root, F, succ):
    fm = failed_mask(F)
    nodes = td_reach(n, root, F, succ)
    if not nodes & ~fm:
        return 0, (0,) * n
    adj = [0] * n
    for x in _bits(nodes & fm):
        adj[x] = succ[x] & ~F[x]
    return nodes, tuple(adj)


def td_update(n, nodes, adj, root, o, t, F, succ, keep_owner=False):
    """Apply a notification ``(o, t)`` to a tracking digraph; ``F`` already holds it."""
    if not nodes >> t & 1:
        return nodes, adj
    adj = list(adj)
    if adj[t]:
        adj[t] &= ~(1 << o)
        kept = reach(adj, root) & nodes
        for x in _bits(nodes & ~kept):
            adj[x] = 0
        nodes = kept
    else:
        excluded = F[t] & ~(1 << o) if keep_owner else F[t]
        queue = deque((t, y) for y in _bits(succ[t] & ~excluded))
        while queue:
            x, y = queue.popleft()
            adj[x] |= 1 << y
            if not nodes >> y & 1:
                nodes |= 1 << y
                if F[y]:
                    queue.extend((y, z) for z in _bits(succ[y] & ~F[y]))
    if not nodes & ~failed_mask(F):
        return 0, (0,) * n
    return nodes, tuple(adj)


def rtd_build(n, root, F, has_msg, succ):
    fm = failed_mask(F)
    seen = 1 << root
    frontier = seen & fm
    while frontier:
        nxt = 0
        for x in _bits(frontier):
            nxt |= succ[x]
        new = nxt & ~seen
        seen |= new
        frontier = new & fm
    adj = [0] * n
    for x in _bits(seen & fm):
        adj[x] = succ[x] if has_msg else succ[x] & ~F[x]
    return seen, tuple(adj)


def td_violations(n, root, nodes, adj, F, succ):
    bits = 0
    if not nodes >> root & 1:
        bits |= I1
    allowed = 1 << root
    for q in range(n):
        out = adj[q]
        in_td = nodes >> q & 1
        if F[q] and in_td:
            expected = succ[q] & ~F[q]
            if expected & ~nodes:
                bits |= I2
            allowed |= expected
            if out & ~expected:
                bits |= I3
        elif out:
            bits |= I3
        if out & ~nodes:
            bits |= I3
    if nodes & ~allowed:
        bits |= I4
    return bits


def server_violations(n, M, F, g, succ):
    """Per-root violation bits for one server's tracking state."""
    out = []
    for root in range(n):
        nodes, adj = g[root]
        has_msg = M >> root & 1
        bits = 0
        if nodes:
            bits |= td_violations(n, root, nodes, adj, F, succ)
        if has_msg:
            if nodes:
                bits |= TD_EQUIV
        elif (nodes, adj) != td_build(n, root, F, succ):
            bits |= TD_EQUIV
        r_nodes, r_adj = rtd_build(n, root, F, has_msg, succ)
        if nodes & ~r_nodes or any(adj[x] & ~r_adj[x] for x in range(n)):
            bits |= RTD_SUPERSET
        if not has_msg:
            lost = r_nodes & ~nodes & ~failed_mask(F) & reach(r_adj, root)
            if lost:
                bits |= RTD_INVARIANT
        out.append(bits)
    return tuple(out)


def step_violations(n, M0, F0, g0, M1, F1, g1, succ):
    """Per-root bits for properties of a single transition of one server."""
    fm1 = failed_mask(F1)
    out = []
    for root in range(n):
        bits = 0
        has0 = M0 >> root & 1
        has1 = M1 >> root & 1
        r0_nodes, r0_adj = rtd_build(n, root, F0, has0, succ)
        r1_nodes, r1_adj = rtd_build(n, root, F1, has1, succ)
        if r0_nodes & ~r1_nodes:
            bits |= RTD_MONOTONIC
        for x in range(n):
            dropped = r0_adj[x] & ~r1_adj[x]
            # only edges excluded now by a received notification may vanish
            if dropped and (has1 or dropped & ~F1[x]):
                bits |= RTD_MONOTONIC
            regained = r1_adj[x] & ~r0_adj[x] & F0[x]
            if regained and r0_nodes >> x & 1 and not has1:
                bits |= RTD_MONOTONIC
        removed = g0[root][0] & ~g1[root][0]
        if removed and not has1:
            unpruned = td_reach(n, root, F1, succ)
            if unpruned & ~fm1 or g1[root][0]:
                # no complete pruning: each removed server must be cut off
                if removed & unpruned:
                    bits |= REMOVAL
        out.append(bits)
    return tuple(out)


def _encode(obj, words):
    if obj is None:
        words.append(2)
    elif isinstance(obj, tuple):
        words.append(3)
        words.append(len(obj))
        for item in obj:
            _encode(item, words)
    else:
        words.append(1)
        words.append(obj)


def fingerprint(obj):
    """128-bit blake2b digest of a nested tuple of non-negative ints and None."""
    words = array("Q")
    _encode(obj, words)
    return blake2b(words.tobytes(), digest_size=16).digest()
