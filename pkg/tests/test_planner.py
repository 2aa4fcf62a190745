from __future__ import annotations

import math
import random
import shutil
import sys
import textwrap
from collections import deque
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import utgplan
from utgplan.errors import InvalidExternalPlan, PlannerCrash, PlannerTimeout, UnknownNode
from utgplan.pddl import Plan
from utgplan.planner import (
    UNIFORM,
    CostModel,
    ExternalPlannerSpec,
    distances_to,
    external_plan,
    find_plan,
    validate_plan,
)
from utgplan.sim import random_utg
from utgplan.utg import TransitionEdge, UiNode, build_utg, click


def bfs_oracle(utg, src):
    adj = {}
    for s, d in utg.edges:
        adj.setdefault(s, []).append(d)
    dist = {src: 0}
    queue = deque([src])
    while queue:
        u = queue.popleft()
        for v in adj.get(u, ()):
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def bellman_ford_oracle(utg, src, cost):
    dist = {n: math.inf for n in utg.nodes}
    dist[src] = 0.0
    for _ in range(len(dist)):
        changed = False
        for (s, d), e in utg.edges.items():
            w = dist[s] + cost(e.label)
            if w < dist[d]:
                dist[d] = w
                changed = True
        if not changed:
            break
    return dist


def all_shortest_paths(utg, src, dst, length):
    out = []

    def walk(path):
        if len(path) - 1 == length:
            if path[-1] == dst:
                out.append(list(path))
            return
        for (s, d) in utg.edges:
            if s == path[-1]:
                walk(path + [d])

    walk([src])
    return out


# --- calendar --------------------------------------------------------------------


def test_calendar_reference_plan(calendar):
    plan = find_plan(calendar, "SplashActivity", "ManageEventTypesActivity")
    assert plan.nodes == ["SplashActivity", "MainActivity", "SettingsActivity", "ManageEventTypesActivity"]
    assert plan.cost == 3


def test_calendar_time_zone(calendar):
    plan = find_plan(calendar, "SplashActivity", "SelectTimeZoneActivity")
    assert plan.nodes == ["SplashActivity", "MainActivity", "EventActivity", "SelectTimeZoneActivity"]


def test_trivial_and_unreachable(calendar):
    assert find_plan(calendar, "MainActivity", "MainActivity") == Plan((), 0)
    assert find_plan(calendar, "ContributorsActivity", "MainActivity") is None
    with pytest.raises(UnknownNode):
        find_plan(calendar, "Nope", "MainActivity")


def test_distances_to(calendar):
    d = distances_to(calendar, "SettingsActivity")
    assert d == {"SettingsActivity": 0.0, "MainActivity": 1.0, "SplashActivity": 2.0}


def test_lexicographic_tie_break():
    nodes = [UiNode(n) for n in "SABT"]
    edges = [
        TransitionEdge("S", "B", click("b")),
        TransitionEdge("S", "A", click("a")),
        TransitionEdge("B", "T", click("t1")),
        TransitionEdge("A", "T", click("t2")),
    ]
    assert find_plan(build_utg(nodes, edges), "S", "T").nodes == ["S", "A", "T"]


# --- oracle properties -----------------------------------------------------------


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 40), st.floats(0.02, 0.3))
def test_plan_length_matches_bfs(seed, n, density):
    rng = random.Random(seed)
    utg = random_utg(rng, n, density)
    ids = list(utg.nodes)
    for _ in range(5):
        s, t = rng.choice(ids), rng.choice(ids)
        plan = find_plan(utg, s, t)
        oracle = bfs_oracle(utg, s)
        if t not in oracle:
            assert plan is None
            continue
        assert plan is not None and len(plan) == oracle[t]
        assert validate_plan(utg, s, t, plan)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 9))
def test_plan_is_lexicographically_smallest(seed, n):
    rng = random.Random(seed)
    utg = random_utg(rng, n, 0.35)
    s, t = rng.sample(list(utg.nodes), 2)
    plan = find_plan(utg, s, t)
    if plan is None:
        return
    assert plan.nodes == min(all_shortest_paths(utg, s, t, len(plan)))


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 30))
def test_weighted_plan_matches_bellman_ford(seed, n):
    rng = random.Random(seed)
    utg = random_utg(rng, n, 0.2)
    weights = {a: rng.choice([0.5, 1.0, 2.0, 3.5]) for node in utg.nodes.values() for a in node.actions}
    cost = CostModel(lambda a: weights[a])
    s, t = rng.choice(list(utg.nodes)), rng.choice(list(utg.nodes))
    plan = find_plan(utg, s, t, cost)
    oracle = bellman_ford_oracle(utg, s, cost)
    if math.isinf(oracle[t]):
        assert plan is None
        return
    assert plan is not None
    assert plan.cost == pytest.approx(oracle[t])
    assert validate_plan(utg, s, t, plan)


def test_cost_model_rejects_bad_costs():
    utg = build_utg([UiNode("A"), UiNode("B")], [TransitionEdge("A", "B", click("x"))])
    for bad in (0.0, -1.0, math.inf, math.nan):
        with pytest.raises(ValueError):
            find_plan(utg, "A", "B", CostModel(lambda a, v=bad: v))
    assert UNIFORM.is_uniform


# --- validation ------------------------------------------------------------------


def test_validate_reasons(calendar):
    ok = find_plan(calendar, "SplashActivity", "AboutActivity")
    assert validate_plan(calendar, "SplashActivity", "AboutActivity", ok)
    r = validate_plan(calendar, "MainActivity", "AboutActivity", ok)
    assert (r.valid, r.failed_step, r.reason) == (False, 0, "precondition at(from)")
    r = validate_plan(calendar, "SplashActivity", "AboutActivity", Plan.from_nodes(["SplashActivity", "AboutActivity"]))
    assert r.reason == "precondition connected(from, to)"
    r = validate_plan(calendar, "SplashActivity", "AboutActivity", Plan.from_nodes(["SplashActivity", "MainActivity"]))
    assert (r.failed_step, r.reason) == (None, "goal-achieved(target) not reached")
    assert "end of plan" in str(r)
    assert validate_plan(calendar, "MainActivity", "MainActivity", Plan())


# --- external planners -----------------------------------------------------------


def _script(tmp_path, body):
    path = tmp_path / "fake_planner.py"
    path.write_text(textwrap.dedent(body))
    return f"{sys.executable} {path} {{domain}} {{problem}} {{plan_out}}"


GOOD = """
    import sys
    sys.path.insert(0, {src!r})
    from utgplan.pddl import render_plan, utg_from_problem
    from utgplan.planner import find_plan
    domain, problem, out = sys.argv[1:]
    utg, init, target = utg_from_problem(open(problem).read())
    plan = find_plan(utg, init, target)
    if plan is None:
        print("search stopped: task unsolvable")
        sys.exit(12)
    open(out, "w").write(render_plan(plan))
"""


@pytest.fixture
def good_planner(tmp_path):
    src = str(Path(utgplan.__file__).parent.parent)
    return ExternalPlannerSpec(_script(tmp_path, GOOD.format(src=src)))


def test_external_plan_agrees(calendar, good_planner):
    plan = external_plan(good_planner, calendar, "SplashActivity", "ManageEventTypesActivity")
    assert plan == find_plan(calendar, "SplashActivity", "ManageEventTypesActivity")


def test_external_unsolvable(calendar, good_planner):
    assert external_plan(good_planner, calendar, "ContributorsActivity", "MainActivity") is None


def test_external_crash(calendar, tmp_path):
    spec = ExternalPlannerSpec(_script(tmp_path, "import sys\nsys.stderr.write('boom')\nsys.exit(3)\n"))
    with pytest.raises(PlannerCrash) as info:
        external_plan(spec, calendar, "SplashActivity", "MainActivity")
    assert info.value.returncode == 3


def test_external_timeout(calendar, tmp_path):
    spec = ExternalPlannerSpec(_script(tmp_path, "import time\ntime.sleep(5)\n"), timeout=0.3)
    with pytest.raises(PlannerTimeout):
        external_plan(spec, calendar, "SplashActivity", "MainActivity")


@pytest.mark.parametrize(
    "plan_text",
    ["(navigate SplashActivity AboutActivity)\n", "(jump a b)\n", "(navigate SplashActivity MainActivity)\n; cost = 4 (unit cost)\n"],
)
def test_external_invalid_plan(calendar, tmp_path, plan_text):
    body = f"import sys\nopen(sys.argv[3], 'w').write({plan_text!r})\n"
    spec = ExternalPlannerSpec(_script(tmp_path, body))
    with pytest.raises(InvalidExternalPlan):
        external_plan(spec, calendar, "SplashActivity", "AboutActivity")


def test_external_no_plan_file(calendar, tmp_path):
    spec = ExternalPlannerSpec(_script(tmp_path, "pass\n"))
    with pytest.raises(InvalidExternalPlan):
        external_plan(spec, calendar, "SplashActivity", "AboutActivity")


@pytest.mark.integration
@pytest.mark.skipif(shutil.which("fast-downward") is None, reason="Fast Downward not installed")
def test_fast_downward(calendar):
    spec = ExternalPlannerSpec(
        "fast-downward --plan-file {plan_out} {domain} {problem} --search astar(blind())",
        timeout=120,
    )
    plan = external_plan(spec, calendar, "SplashActivity", "ManageEventTypesActivity")
    assert len(plan) == 3
