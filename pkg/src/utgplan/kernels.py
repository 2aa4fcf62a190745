"""Kernel backend selection.

The compiled ``_ckernels`` extension is used when it was built; otherwise the
pure-Python ``_pykernels`` module takes over.  Setting the environment
variable ``UTGPLAN_PURE_PYTHON=1`` forces the fallback.
"""

from __future__ import annotations

import os

from utgplan import _pykernels

if os.environ.get("UTGPLAN_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from utgplan import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"

bfs_levels = _impl.bfs_levels
dijkstra = _impl.dijkstra
greedy_path = _impl.greedy_path

# int64 counts in the compiled kernel overflow past 62 ranks
_MAX_COMPILED_RANKS = 62


def signed_rank_counts(doubled_ranks: list[int]) -> list[int]:
    if len(doubled_ranks) > _MAX_COMPILED_RANKS:
        return _pykernels.signed_rank_counts(doubled_ranks)
    return _impl.signed_rank_counts(doubled_ranks)


def available_backends() -> dict[str, object]:
    backends: dict[str, object] = {"python": _pykernels}
    try:
        from utgplan import _ckernels

        backends["cython"] = _ckernels
    except ImportError:
        pass
    return backends
