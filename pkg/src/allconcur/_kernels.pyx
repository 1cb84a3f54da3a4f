# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled tracking-digraph kernels; same contract as ``_kernels_py``.

Masks are ``unsigned long long``, so servers are limited to 64.
"""

from cpython.bytes cimport PyBytes_FromStringAndSize
from cpython.mem cimport PyMem_Free, PyMem_Malloc
from cpython.tuple cimport PyTuple_GET_ITEM, PyTuple_GET_SIZE
from hashlib import blake2b

ctypedef unsigned long long u64

cdef extern from *:
    int ctz64 "__builtin_ctzll"(unsigned long long) nogil

DEF MAXN = 64

I1 = 1
I2 = 2
I3 = 4
I4 = 8
TD_EQUIV = 16
RTD_SUPERSET = 32
RTD_INVARIANT = 64
RTD_MONOTONIC = 1
REMOVAL = 2


cdef inline void _load(object seq, int n, u64* out):
    cdef int i
    for i in range(n):
        out[i] = seq[i]


cdef inline tuple _store(int n, u64* arr):
    cdef int i
    return tuple([arr[i] for i in range(n)])


cdef inline u64 _failed(int n, u64* F) nogil:
    cdef u64 m = 0
    cdef int q
    for q in range(n):
        if F[q]:
            m |= (<u64>1) << q
    return m


cdef u64 _reach(u64* adj, int root) nogil:
    cdef u64 seen = (<u64>1) << root
    cdef u64 frontier = seen
    cdef u64 nxt, f
    while frontier:
        nxt = 0
        f = frontier
        while f:
            nxt |= adj[ctz64(f)]
            f &= f - 1
        frontier = nxt & ~seen
        seen |= frontier
    return seen


cdef u64 _td_reach(int n, int root, u64* F, u64* succ) nogil:
    cdef u64 fm = _failed(n, F)
    cdef u64 seen = (<u64>1) << root
    cdef u64 frontier = seen & fm
    cdef u64 nxt, f, new
    cdef int x
    while frontier:
        nxt = 0
        f = frontier
        while f:
            x = ctz64(f)
            nxt |= succ[x] & ~F[x]
            f &= f - 1
        new = nxt & ~seen
        seen |= new
        frontier = new & fm
    return seen


cdef u64 _td_build(int n, int root, u64* F, u64* succ, u64* adj) nogil:
    cdef u64 fm = _failed(n, F)
    cdef u64 nodes = _td_reach(n, root, F, succ)
    cdef int x
    for x in range(n):
        adj[x] = 0
    if not (nodes & ~fm):
        return 0
    for x in range(n):
        if (nodes & fm) >> x & 1:
            adj[x] = succ[x] & ~F[x]
    return nodes


cdef u64 _rtd_build(int n, int root, u64* F, bint has_msg, u64* succ, u64* adj) nogil:
    cdef u64 fm = _failed(n, F)
    cdef u64 seen = (<u64>1) << root
    cdef u64 frontier = seen & fm
    cdef u64 nxt, f, new
    cdef int x
    while frontier:
        nxt = 0
        f = frontier
        while f:
            nxt |= succ[ctz64(f)]
            f &= f - 1
        new = nxt & ~seen
        seen |= new
        frontier = new & fm
    for x in range(n):
        adj[x] = 0
        if (seen & fm) >> x & 1:
            adj[x] = succ[x] if has_msg else succ[x] & ~F[x]
    return seen


cdef int _td_violations(int n, int root, u64 nodes, u64* adj, u64* F, u64* succ) nogil:
    cdef int bits = 0
    cdef u64 allowed = (<u64>1) << root
    cdef u64 expected, out
    cdef int q
    if not (nodes >> root & 1):
        bits |= 1
    for q in range(n):
        out = adj[q]
        if F[q] and (nodes >> q & 1):
            expected = succ[q] & ~F[q]
            if expected & ~nodes:
                bits |= 2
            allowed |= expected
            if out & ~expected:
                bits |= 4
        elif out:
            bits |= 4
        if out & ~nodes:
            bits |= 4
    if nodes & ~allowed:
        bits |= 8
    return bits


def failed_mask(F):
    cdef u64 f[MAXN]
    cdef int n = len(F)
    _load(F, n, f)
    return _failed(n, f)


def reach(adj, int root):
    cdef u64 a[MAXN]
    _load(adj, len(adj), a)
    return _reach(a, root)


def td_reach(int n, int root, F, succ):
    cdef u64 f[MAXN]
    cdef u64 s[MAXN]
    _load(F, n, f)
    _load(succ, n, s)
    return _td_reach(n, root, f, s)


def td_build(int n, int root, F, succ):
    cdef u64 f[MAXN]
    cdef u64 s[MAXN]
    cdef u64 adj[MAXN]
    _load(F, n, f)
    _load(succ, n, s)
    nodes = _td_build(n, root, f, s, adj)
    return nodes, _store(n, adj)


def td_update(int n, u64 nodes, adj, int root, int o, int t, F, succ, bint keep_owner=False):
    cdef u64 f[MAXN]
    cdef u64 s[MAXN]
    cdef u64 a[MAXN]
    cdef int qx[MAXN * MAXN]
    cdef int qy[MAXN * MAXN]
    cdef int head = 0, tail = 0
    cdef int x, y, z
    cdef u64 excluded, kept, m
    if not (nodes >> t & 1):
        return nodes, adj
    _load(F, n, f)
    _load(succ, n, s)
    _load(adj, n, a)
    if a[t]:
        a[t] &= ~((<u64>1) << o)
        kept = _reach(a, root) & nodes
        for x in range(n):
            if (nodes & ~kept) >> x & 1:
                a[x] = 0
        nodes = kept
    else:
        excluded = f[t] & ~((<u64>1) << o) if keep_owner else f[t]
        m = s[t] & ~excluded
        while m:
            qx[tail] = t
            qy[tail] = ctz64(m)
            tail += 1
            m &= m - 1
        while head < tail:
            x = qx[head]
            y = qy[head]
            head += 1
            a[x] |= (<u64>1) << y
            if not (nodes >> y & 1):
                nodes |= (<u64>1) << y
                if f[y]:
                    m = s[y] & ~f[y]
                    while m:
                        qx[tail] = y
                        qy[tail] = ctz64(m)
                        tail += 1
                        m &= m - 1
    if not (nodes & ~_failed(n, f)):
        return 0, (0,) * n
    return nodes, _store(n, a)


def rtd_build(int n, int root, F, bint has_msg, succ):
    cdef u64 f[MAXN]
    cdef u64 s[MAXN]
    cdef u64 adj[MAXN]
    _load(F, n, f)
    _load(succ, n, s)
    nodes = _rtd_build(n, root, f, has_msg, s, adj)
    return nodes, _store(n, adj)


def td_violations(int n, int root, u64 nodes, adj, F, succ):
    cdef u64 f[MAXN]
    cdef u64 s[MAXN]
    cdef u64 a[MAXN]
    _load(F, n, f)
    _load(succ, n, s)
    _load(adj, n, a)
    return _td_violations(n, root, nodes, a, f, s)


def server_violations(int n, u64 M, F, g, succ):
    cdef u64 f[MAXN]
    cdef u64 s[MAXN]
    cdef u64 a[MAXN]
    cdef u64 b[MAXN]
    cdef u64 r[MAXN]
    cdef u64 nodes, built, r_nodes, fm
    cdef int root, x, bits
    cdef bint has_msg, same
    _load(F, n, f)
    _load(succ, n, s)
    fm = _failed(n, f)
    out = []
    for root in range(n):
        td = g[root]
        nodes = td[0]
        _load(td[1], n, a)
        has_msg = M >> root & 1
        bits = 0
        if nodes:
            bits |= _td_violations(n, root, nodes, a, f, s)
        if has_msg:
            if nodes:
                bits |= 16
        else:
            built = _td_build(n, root, f, s, b)
            same = built == nodes
            for x in range(n):
                if a[x] != b[x]:
                    same = False
            if not same:
                bits |= 16
        r_nodes = _rtd_build(n, root, f, has_msg, s, r)
        if nodes & ~r_nodes:
            bits |= 32
        for x in range(n):
            if a[x] & ~r[x]:
                bits |= 32
        if not has_msg:
            if r_nodes & ~nodes & ~fm & _reach(r, root):
                bits |= 64
        out.append(bits)
    return tuple(out)


def step_violations(int n, u64 M0, F0, g0, u64 M1, F1, g1, succ):
    cdef u64 f0[MAXN]
    cdef u64 f1[MAXN]
    cdef u64 s[MAXN]
    cdef u64 r0[MAXN]
    cdef u64 r1[MAXN]
    cdef u64 fm1, r0_nodes, r1_nodes, dropped, regained, removed, unpruned, n0, n1
    cdef int root, x, bits
    cdef bint has0, has1
    _load(F0, n, f0)
    _load(F1, n, f1)
    _load(succ, n, s)
    fm1 = _failed(n, f1)
    out = []
    for root in range(n):
        bits = 0
        has0 = M0 >> root & 1
        has1 = M1 >> root & 1
        r0_nodes = _rtd_build(n, root, f0, has0, s, r0)
        r1_nodes = _rtd_build(n, root, f1, has1, s, r1)
        if r0_nodes & ~r1_nodes:
            bits |= 1
        for x in range(n):
            dropped = r0[x] & ~r1[x]
            if dropped and (has1 or dropped & ~f1[x]):
                bits |= 1
            regained = r1[x] & ~r0[x] & f0[x]
            if regained and (r0_nodes >> x & 1) and not has1:
                bits |= 1
        n0 = g0[root][0]
        n1 = g1[root][0]
        removed = n0 & ~n1
        if removed and not has1:
            unpruned = _td_reach(n, root, f1, s)
            if (unpruned & ~fm1) or n1:
                if removed & unpruned:
                    bits |= 2
        out.append(bits)
    return tuple(out)


cdef int _encode(object obj, u64* buf, int pos, int cap) except -1:
    cdef Py_ssize_t i, size
    if pos + 2 > cap:
        raise OverflowError("state too large to fingerprint")
    if obj is None:
        buf[pos] = 2
        return pos + 1
    if isinstance(obj, tuple):
        size = PyTuple_GET_SIZE(obj)
        buf[pos] = 3
        buf[pos + 1] = size
        pos += 2
        for i in range(size):
            pos = _encode(<object>PyTuple_GET_ITEM(obj, i), buf, pos, cap)
        return pos
    buf[pos] = 1
    buf[pos + 1] = obj
    return pos + 2


def fingerprint(obj):
    cdef int cap = 1 << 16
    cdef u64* buf = <u64*>PyMem_Malloc(cap * sizeof(u64))
    cdef int used
    if buf == NULL:
        raise MemoryError()
    try:
        used = _encode(obj, buf, 0, cap)
        return blake2b(PyBytes_FromStringAndSize(<char*>buf, used * sizeof(u64)), digest_size=16).digest()
    finally:
        PyMem_Free(buf)
