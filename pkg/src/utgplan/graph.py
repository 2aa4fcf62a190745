"""CSR view of a :class:`~utgplan.utg.Utg` used by the search kernels.

Node indices follow ascending node-id order, so "smallest index" and
"smallest id" coincide and the kernels' tie-breaking is id-based.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable

import numpy as np

from utgplan import kernels

if TYPE_CHECKING:
    from utgplan.utg import Action, EdgeKey, Utg


def _csr(n: int, pairs: list[tuple[int, int]]) -> tuple[np.ndarray, np.ndarray, list[int]]:
    order = sorted(range(len(pairs)), key=lambda i: pairs[i])
    indptr = np.zeros(n + 1, dtype=np.int64)
    for u, _ in pairs:
        indptr[u + 1] += 1
    np.cumsum(indptr, out=indptr)
    indices = np.fromiter((pairs[i][1] for i in order), dtype=np.int64, count=len(pairs))
    return indptr, indices, order


@dataclass(frozen=True, eq=False)
class CompiledGraph:
    ids: tuple[str, ...]
    index: dict[str, int]
    fwd_indptr: np.ndarray
    fwd_indices: np.ndarray
    fwd_keys: tuple[EdgeKey, ...]
    rev_indptr: np.ndarray
    rev_indices: np.ndarray
    rev_keys: tuple[EdgeKey, ...]

    @classmethod
    def from_utg(cls, utg: Utg) -> CompiledGraph:
        ids = tuple(sorted(utg.nodes))
        index = {node_id: i for i, node_id in enumerate(ids)}
        keys = list(utg.edges)
        fwd_pairs = [(index[s], index[d]) for s, d in keys]
        rev_pairs = [(d, s) for s, d in fwd_pairs]
        fp, fi, forder = _csr(len(ids), fwd_pairs)
        rp, ri, rorder = _csr(len(ids), rev_pairs)
        return cls(
            ids=ids,
            index=index,
            fwd_indptr=fp,
            fwd_indices=fi,
            fwd_keys=tuple(keys[i] for i in forder),
            rev_indptr=rp,
            rev_indices=ri,
            rev_keys=tuple(keys[i] for i in rorder),
        )

    @property
    def n(self) -> int:
        return len(self.ids)

    def bfs(self, source: int, max_depth: int | None = None, reverse: bool = False) -> tuple[list[int], list[int]]:
        depth = self.n if max_depth is None else max_depth
        if reverse:
            return kernels.bfs_levels(self.rev_indptr, self.rev_indices, source, depth)
        return kernels.bfs_levels(self.fwd_indptr, self.fwd_indices, source, depth)

    def weights(self, utg: Utg, cost: Callable[[Action], float] | None, reverse: bool = False) -> np.ndarray:
        keys = self.rev_keys if reverse else self.fwd_keys
        if cost is None:
            return np.ones(len(keys), dtype=np.float64)
        return np.fromiter((cost(utg.edges[k].label) for k in keys), dtype=np.float64, count=len(keys))
