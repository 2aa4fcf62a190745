"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--nodes 2000] [--repeat 5]
"""

from __future__ import annotations

import argparse
import random
import timeit

import numpy as np

from utgplan import _pykernels
from utgplan.graph import CompiledGraph
from utgplan.kernels import available_backends
from utgplan.sim import random_utg


def cases(n: int, seed: int):
    rng = random.Random(seed)
    g = CompiledGraph.from_utg(random_utg(rng, n, 4.0 / n, strongly_connected=True))
    w_rev = np.array([rng.uniform(0.5, 3.0) for _ in range(len(g.rev_indices))])
    unit = np.ones(len(g.fwd_indices))
    hops, _ = _pykernels.bfs_levels(g.rev_indptr, g.rev_indices, 0, n)
    dist = [float(h) if h >= 0 else float("inf") for h in hops]
    ranks = [2 * r for r in range(1, 41)]
    return {
        "bfs_levels": lambda m: m.bfs_levels(g.fwd_indptr, g.fwd_indices, n - 1, n),
        "dijkstra": lambda m: m.dijkstra(g.rev_indptr, g.rev_indices, w_rev, 0),
        "greedy_path": lambda m: m.greedy_path(g.fwd_indptr, g.fwd_indices, unit, dist, n - 1, 0, 1e-9),
        "signed_rank_counts(n=40)": lambda m: m.signed_rank_counts(ranks),
    }


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--nodes", type=int, default=2000)
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    backends = available_backends()
    if "cython" not in backends:
        print("compiled extension not built; only the Python backend is available")
    print(f"random graph: {args.nodes} nodes, best of {args.repeat}")
    print(f"{'kernel':<26}" + "".join(f"{name:>12}" for name in backends) + ("     speedup" if len(backends) > 1 else ""))
    for label, fn in cases(args.nodes, args.seed).items():
        best = {}
        for name, mod in backends.items():
            fn(mod)  # warm-up
            best[name] = min(timeit.repeat(lambda: fn(mod), number=3, repeat=args.repeat)) / 3
        row = f"{label:<26}" + "".join(f"{best[name] * 1e3:>10.3f}ms" for name in backends)
        if "cython" in best:
            row += f"{best['python'] / best['cython']:>11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
