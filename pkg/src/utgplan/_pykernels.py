"""Pure-Python graph and rank-sum kernels.

Reference implementations of the routines in ``_ckernels.pyx``; both modules
expose identical signatures and must return identical results.  Graphs are in
CSR form: the successors of node ``u`` are ``indices[indptr[u]:indptr[u+1]]``,
sorted ascending.
"""

from __future__ import annotations

import heapq
import math
from typing import Sequence


def _as_list(seq: Sequence) -> list:
    return seq.tolist() if hasattr(seq, "tolist") else list(seq)


def bfs_levels(
    indptr: Sequence[int],
    indices: Sequence[int],
    source: int,
    max_depth: int,
) -> tuple[list[int], list[int]]:
    """Level-synchronous BFS from ``source`` up to ``max_depth`` hops.

    Returns ``(dist, parent)``; unreached nodes have ``-1`` in both.  Each
    level is expanded in ascending node order, so a node's parent is the
    smallest-index node on the previous level with an edge to it.
    """
    indptr = _as_list(indptr)
    indices = _as_list(indices)
    n = len(indptr) - 1
    dist = [-1] * n
    parent = [-1] * n
    dist[source] = 0
    frontier = [source]
    depth = 0
    while frontier and depth < max_depth:
        depth += 1
        nxt = []
        for u in frontier:
            for j in range(indptr[u], indptr[u + 1]):
                v = indices[j]
                if dist[v] < 0:
                    dist[v] = depth
                    parent[v] = u
                    nxt.append(v)
        nxt.sort()
        frontier = nxt
    return dist, parent


def dijkstra(
    indptr: Sequence[int],
    indices: Sequence[int],
    weights: Sequence[float],
    source: int,
) -> list[float]:
    indptr = _as_list(indptr)
    indices = _as_list(indices)
    weights = _as_list(weights)
    n = len(indptr) - 1
    dist = [math.inf] * n
    dist[source] = 0.0
    heap = [(0.0, source)]
    done = [False] * n
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for j in range(indptr[u], indptr[u + 1]):
            v = indices[j]
            nd = d + weights[j]
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def greedy_path(
    indptr: Sequence[int],
    indices: Sequence[int],
    weights: Sequence[float],
    dist_to_target: Sequence[float],
    init: int,
    target: int,
    rtol: float,
) -> list[int]:
    """Walk from ``init`` to ``target`` along edges that stay on a cheapest path.

    ``dist_to_target`` holds cheapest costs to ``target``.  At each node the
    smallest-index successor that keeps the remaining cost tight is taken,
    which yields the lexicographically smallest optimal node sequence.
    Returns an empty list when ``target`` is unreachable.
    """
    indptr = _as_list(indptr)
    indices = _as_list(indices)
    weights = _as_list(weights)
    dist = _as_list(dist_to_target)
    if math.isinf(dist[init]):
        return []
    path = [init]
    u = init
    while u != target:
        slack = rtol * max(1.0, dist[u])
        for j in range(indptr[u], indptr[u + 1]):
            v = indices[j]
            if v != u and abs(weights[j] + dist[v] - dist[u]) <= slack:
                u = v
                break
        else:
            raise RuntimeError("distance table is inconsistent with the graph")
        path.append(u)
    return path


def signed_rank_counts(doubled_ranks: Sequence[int]) -> list[int]:
    """Null distribution of the doubled positive-rank sum.

    ``counts[t]`` is the number of the ``2**n`` sign assignments whose
    positive ranks (each doubled so tied half-ranks stay integral) sum to ``t``.
    """
    ranks = _as_list(doubled_ranks)
    total = sum(ranks)
    counts = [0] * (total + 1)
    counts[0] = 1
    reach = 0
    for r in ranks:
        reach += r
        for t in range(reach, r - 1, -1):
            counts[t] += counts[t - r]
    return counts
