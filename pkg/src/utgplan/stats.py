"""Wilcoxon signed-rank test for paired samples."""

from __future__ import annotations

import math
from typing import Iterable, NamedTuple

from utgplan.errors import AllZeroDifferences
from utgplan.kernels import signed_rank_counts

EXACT_MAX_N = 20


class WilcoxonResult(NamedTuple):
    statistic: float
    pvalue: float
    n: int
    method: str


def average_ranks(values: list[float]) -> list[float]:
    """1-based ranks of ``values``; tied values share their mean rank."""
    order = sorted(range(len(values)), key=values.__getitem__)
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        shared = (i + j) / 2 + 1
        for k in range(i, j + 1):
            ranks[order[k]] = shared
        i = j + 1
    return ranks


def _lower_tail_exact(doubled: list[int], t2: int) -> float:
    counts = signed_rank_counts(doubled)
    hits = sum(counts[: t2 + 1])
    return hits / 2 ** len(doubled)


def _lower_tail_normal(ranks: list[float], t: float) -> float:
    n = len(ranks)
    mean = n * (n + 1) / 4
    tie_sizes: dict[float, int] = {}
    for r in ranks:
        tie_sizes[r] = tie_sizes.get(r, 0) + 1
    var = n * (n + 1) * (2 * n + 1) / 24 - sum(c**3 - c for c in tie_sizes.values()) / 48
    if var <= 0:
        return 1.0
    z = (t + 0.5 - mean) / math.sqrt(var)
    return 0.5 * math.erfc(-z / math.sqrt(2))


def wilcoxon_signed_rank(
    pairs: Iterable[tuple[float, float]],
    method: str = "auto",
    alternative: str = "two-sided",
) -> WilcoxonResult:
    """Test whether paired differences ``x - y`` are symmetric about zero.

    Zero differences are dropped.  The statistic is the smaller of the
    positive and negative rank sums.  ``method="auto"`` enumerates the exact
    null distribution up to 20 pairs and uses the continuity-corrected normal
    approximation beyond.  ``alternative`` is ``"two-sided"``, ``"greater"``
    (x tends to exceed y) or ``"less"``.
    """
    if method not in ("auto", "exact", "normal"):
        raise ValueError(f"unknown method {method!r}")
    if alternative not in ("two-sided", "greater", "less"):
        raise ValueError(f"unknown alternative {alternative!r}")

    diffs = [float(x) - float(y) for x, y in pairs]
    diffs = [d for d in diffs if d != 0.0]
    if not diffs:
        raise AllZeroDifferences("every paired difference is zero")
    n = len(diffs)
    ranks = average_ranks([abs(d) for d in diffs])
    t_plus = sum(r for r, d in zip(ranks, diffs) if d > 0)
    total = n * (n + 1) / 2
    t_minus = total - t_plus
    statistic = float(min(t_plus, t_minus))

    if method == "auto":
        method = "exact" if n <= EXACT_MAX_N else "normal"

    if alternative == "two-sided":
        tail_at = statistic
    elif alternative == "less":
        tail_at = t_plus
    else:
        tail_at = t_minus  # P(T+ >= t_plus) == P(T+ <= total - t_plus)

    if method == "exact":
        doubled = [int(round(2 * r)) for r in ranks]
        p = _lower_tail_exact(doubled, int(round(2 * tail_at)))
    else:
        p = _lower_tail_normal(ranks, tail_at)
    if alternative == "two-sided":
        p *= 2
    return WilcoxonResult(statistic, min(1.0, p), n, method)
