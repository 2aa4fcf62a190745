# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the routines in ``_pykernels``.

Signatures and results match the pure-Python module exactly; see it for
documentation.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY, fabs, isinf

cnp.import_array()

ctypedef cnp.int64_t i64


def bfs_levels(indptr, indices, Py_ssize_t source, Py_ssize_t max_depth):
    cdef const i64[:] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const i64[:] ix = np.ascontiguousarray(indices, dtype=np.int64)
    cdef Py_ssize_t n = ip.shape[0] - 1
    cdef i64[:] dist = np.full(n, -1, dtype=np.int64)
    cdef i64[:] parent = np.full(n, -1, dtype=np.int64)
    cdef i64[:] frontier = np.empty(max(n, 1), dtype=np.int64)
    cdef i64[:] nxt = np.empty(max(n, 1), dtype=np.int64)
    cdef unsigned char[:] mark = np.zeros(max(n, 1), dtype=np.uint8)
    cdef Py_ssize_t nf = 1, nn, i, j, u, v, depth = 0, lo, hi
    dist[source] = 0
    frontier[0] = source
    while nf > 0 and depth < max_depth:
        depth += 1
        nn = 0
        lo = n
        hi = -1
        for i in range(nf):
            u = frontier[i]
            for j in range(ip[u], ip[u + 1]):
                v = ix[j]
                if dist[v] < 0:
                    dist[v] = depth
                    parent[v] = u
                    mark[v] = 1
                    nn += 1
                    if v < lo:
                        lo = v
                    if v > hi:
                        hi = v
        # collect the next level in ascending order
        nf = 0
        if nn:
            for v in range(lo, hi + 1):
                if mark[v]:
                    mark[v] = 0
                    frontier[nf] = v
                    nf += 1
    return np.asarray(dist).tolist(), np.asarray(parent).tolist()


cdef inline void _heap_push(double[:] hk, i64[:] hv, Py_ssize_t *size, double key, i64 val):
    cdef Py_ssize_t i = size[0], p
    size[0] += 1
    while i > 0:
        p = (i - 1) >> 1
        if hk[p] < key or (hk[p] == key and hv[p] <= val):
            break
        hk[i] = hk[p]
        hv[i] = hv[p]
        i = p
    hk[i] = key
    hv[i] = val


cdef inline void _heap_pop(double[:] hk, i64[:] hv, Py_ssize_t *size):
    cdef Py_ssize_t n = size[0] - 1, i = 0, c
    cdef double key = hk[n]
    cdef i64 val = hv[n]
    size[0] = n
    while True:
        c = 2 * i + 1
        if c >= n:
            break
        if c + 1 < n and (hk[c + 1] < hk[c] or (hk[c + 1] == hk[c] and hv[c + 1] < hv[c])):
            c += 1
        if key < hk[c] or (key == hk[c] and val <= hv[c]):
            break
        hk[i] = hk[c]
        hv[i] = hv[c]
        i = c
    if n > 0:
        hk[i] = key
        hv[i] = val


def dijkstra(indptr, indices, weights, Py_ssize_t source):
    cdef const i64[:] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const i64[:] ix = np.ascontiguousarray(indices, dtype=np.int64)
    cdef const double[:] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef Py_ssize_t n = ip.shape[0] - 1
    cdef Py_ssize_t m = ix.shape[0]
    cdef double[:] dist = np.full(n, INFINITY, dtype=np.float64)
    cdef unsigned char[:] done = np.zeros(max(n, 1), dtype=np.uint8)
    cdef double[:] hk = np.empty(m + 1, dtype=np.float64)
    cdef i64[:] hv = np.empty(m + 1, dtype=np.int64)
    cdef Py_ssize_t size = 0, j, u, v
    cdef double d, nd
    dist[source] = 0.0
    _heap_push(hk, hv, &size, 0.0, source)
    while size > 0:
        d = hk[0]
        u = hv[0]
        _heap_pop(hk, hv, &size)
        if done[u]:
            continue
        done[u] = 1
        for j in range(ip[u], ip[u + 1]):
            v = ix[j]
            nd = d + w[j]
            if nd < dist[v]:
                dist[v] = nd
                _heap_push(hk, hv, &size, nd, v)
    return np.asarray(dist).tolist()


def greedy_path(indptr, indices, weights, dist_to_target, Py_ssize_t init,
                Py_ssize_t target, double rtol):
    cdef const i64[:] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const i64[:] ix = np.ascontiguousarray(indices, dtype=np.int64)
    cdef const double[:] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef const double[:] dist = np.ascontiguousarray(dist_to_target, dtype=np.float64)
    cdef Py_ssize_t u = init, v, j
    cdef double slack
    cdef bint moved
    if isinf(dist[init]):
        return []
    path = [init]
    while u != target:
        slack = rtol * (dist[u] if dist[u] > 1.0 else 1.0)
        moved = False
        for j in range(ip[u], ip[u + 1]):
            v = ix[j]
            if v != u and fabs(w[j] + dist[v] - dist[u]) <= slack:
                u = v
                moved = True
                break
        if not moved:
            raise RuntimeError("distance table is inconsistent with the graph")
        path.append(u)
    return path


def signed_rank_counts(doubled_ranks):
    cdef const i64[:] r = np.ascontiguousarray(doubled_ranks, dtype=np.int64)
    cdef Py_ssize_t n = r.shape[0], i, t, reach = 0, total = 0
    for i in range(n):
        total += r[i]
    cdef i64[:] counts = np.zeros(total + 1, dtype=np.int64)
    counts[0] = 1
    for i in range(n):
        reach += r[i]
        t = reach
        while t >= r[i]:
            counts[t] += counts[t - r[i]]
            t -= 1
    return np.asarray(counts).tolist()
