from __future__ import annotations

import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from utgplan.errors import AllZeroDifferences
from utgplan.stats import average_ranks, wilcoxon_signed_rank

def brute_force_p(pairs, alternative="two-sided"):
    """Exact p-value by enumerating every sign assignment of the ranks."""
    diffs = [x - y for x, y in pairs if x != y]
    ranks = average_ranks([abs(d) for d in diffs])
    n = len(diffs)
    total = Fraction(sum(Fraction(r) for r in ranks))
    t_plus = sum(Fraction(r) for r, d in zip(ranks, diffs) if d > 0)
    sums = [sum(Fraction(r) for r, s in zip(ranks, signs) if s) for signs in itertools.product((0, 1), repeat=n)]
    if alternative == "less":
        hits = sum(1 for s in sums if s <= t_plus)
        return hits / 2**n
    if alternative == "greater":
        hits = sum(1 for s in sums if s >= t_plus)
        return hits / 2**n
    w = min(t_plus, total - t_plus)
    hits = sum(1 for s in sums if s <= w)
    return min(1.0, 2 * hits / 2**n)


def test_average_ranks():
    assert average_ranks([3.0, 1.0, 4.0, 1.0, 5.0]) == [3.0, 1.5, 4.0, 1.5, 5.0]
    assert average_ranks([]) == []


def test_all_positive_five():
    res = wilcoxon_signed_rank([(2, 1), (3, 1), (4, 1), (5, 1), (6, 1)])
    assert res.statistic == 0.0
    assert res.pvalue == pytest.approx(0.0625)
    assert res.method == "exact"


def test_all_zero_differences():
    with pytest.raises(AllZeroDifferences):
        wilcoxon_signed_rank([(3, 3)])


def test_symmetric_data():
    pairs = [(1, 2), (2, 1), (5, 3), (3, 5)]
    assert wilcoxon_signed_rank(pairs).pvalue == 1.0


def test_bad_arguments():
    with pytest.raises(ValueError):
        wilcoxon_signed_rank([(1, 2)], method="magic")
    with pytest.raises(ValueError):
        wilcoxon_signed_rank([(1, 2)], alternative="sideways")


# paired Success/Failed columns of the five-agent motivational table
NODES = [(27.0, 71.2), (29.3, 53.8), (39.4, 42.0), (23.8, 55.0), (18.0, 50.7)]
EDGES = [(62.7, 168.0), (65.9, 129.2), (90.6, 100.3), (59.5, 125.6), (66.0, 108.0)]


def test_motivational_table_values():
    # frozen from brute_force_p over all sign patterns
    for column in (NODES, EDGES):
        assert wilcoxon_signed_rank(column).pvalue == pytest.approx(0.0625)
        assert wilcoxon_signed_rank(column, alternative="less").pvalue == pytest.approx(0.03125)
    assert wilcoxon_signed_rank(NODES + EDGES).pvalue == pytest.approx(0.001953125)
    assert brute_force_p(NODES + EDGES) == pytest.approx(0.001953125)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 12), st.sampled_from(["two-sided", "less", "greater"]))
def test_exact_matches_brute_force(seed, n, alternative):
    rng = random.Random(seed)
    # small integer values so that ties and zeros occur
    pairs = [(rng.randint(0, 6), rng.randint(0, 6)) for _ in range(n)]
    if all(x == y for x, y in pairs):
        pairs.append((1, 0))
    res = wilcoxon_signed_rank(pairs, method="exact", alternative=alternative)
    assert res.pvalue == pytest.approx(brute_force_p(pairs, alternative), abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.integers(5, 40), st.sampled_from(["two-sided", "less", "greater"]))
def test_agrees_with_scipy(seed, n, alternative):
    scipy_stats = pytest.importorskip("scipy.stats")
    rng = random.Random(seed)
    pairs = [(rng.gauss(0.3, 1), rng.gauss(0, 1)) for _ in range(n)]
    x, y = zip(*pairs)
    for method, scipy_method in (("exact", "exact"), ("normal", "approx")):
        if method == "exact" and n > 20:
            continue
        ours = wilcoxon_signed_rank(pairs, method=method, alternative=alternative)
        ref = scipy_stats.wilcoxon(x, y, alternative=alternative, method=scipy_method, correction=True)
        assert ours.pvalue == pytest.approx(ref.pvalue, rel=1e-9, abs=1e-12)
        if alternative == "two-sided":
            assert ours.statistic == pytest.approx(ref.statistic)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6))
def test_exact_and_normal_close_at_twenty(seed):
    rng = random.Random(seed)
    pairs = [(rng.gauss(0, 1), rng.gauss(0, 1)) for _ in range(20)]
    exact = wilcoxon_signed_rank(pairs, method="exact").pvalue
    normal = wilcoxon_signed_rank(pairs, method="normal").pvalue
    assert abs(exact - normal) <= 0.02


def test_auto_switches_to_normal():
    pairs = [(i + 1.0, 0.0) for i in range(21)]
    assert wilcoxon_signed_rank(pairs).method == "normal"
    assert wilcoxon_signed_rank(pairs[:20]).method == "exact"


@given(st.lists(st.tuples(st.integers(-5, 5), st.integers(-5, 5)), min_size=1, max_size=30))
def test_pvalue_in_unit_interval(pairs):
    if all(x == y for x, y in pairs):
        return
    res = wilcoxon_signed_rank(pairs)
    assert 0.0 < res.pvalue <= 1.0
    assert 0 <= res.statistic <= res.n * (res.n + 1) / 4
