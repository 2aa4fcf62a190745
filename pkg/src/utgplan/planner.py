"""Optimal navigation plans over a UTG.

Under the navigation domain every reachable state is ``at(u)`` for a single
node, so an optimal plan is a cheapest path in the graph.  :func:`find_plan`
computes it directly; :func:`external_plan` routes the same task through an
external PDDL planner and checks its answer with :func:`validate_plan`.
"""

from __future__ import annotations

import math
import shlex
import subprocess
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from utgplan.errors import (
    InvalidExternalPlan,
    PlanParseError,
    PlannerCrash,
    PlannerTimeout,
    UnknownNode,
)
from utgplan.graph import CompiledGraph
from utgplan.kernels import dijkstra, greedy_path
from utgplan.pddl import Plan, emit_domain, emit_problem, parse_plan
from utgplan.utg import Action, Utg

_RTOL = 1e-9


@dataclass(frozen=True)
class CostModel:
    """Per-action cost; ``None`` means every action costs 1."""

    cost: Callable[[Action], float] | None = None

    @property
    def is_uniform(self) -> bool:
        return self.cost is None

    def __call__(self, action: Action) -> float:
        if self.cost is None:
            return 1.0
        value = float(self.cost(action))
        if not value > 0.0 or math.isinf(value):
            raise ValueError(f"action cost must be positive and finite, got {value} for {action}")
        return value


UNIFORM = CostModel()


def _check_nodes(utg: Utg, *node_ids: str) -> None:
    for node_id in node_ids:
        if node_id not in utg.nodes:
            raise UnknownNode(node_id)


def distances_to(utg: Utg, target: str, cost: CostModel = UNIFORM) -> dict[str, float]:
    """Cheapest cost from every node that can reach ``target``."""
    _check_nodes(utg, target)
    g = utg.compiled
    dist = _dist_to_target(utg, g, g.index[target], cost)
    return {g.ids[i]: d for i, d in enumerate(dist) if not math.isinf(d)}


def _dist_to_target(utg: Utg, g: CompiledGraph, t: int, cost: CostModel) -> list[float]:
    if cost.is_uniform:
        hops, _ = g.bfs(t, reverse=True)
        return [float(h) if h >= 0 else math.inf for h in hops]
    return dijkstra(g.rev_indptr, g.rev_indices, g.weights(utg, cost, reverse=True), t)


def find_plan(
    utg: Utg,
    init: str,
    target: str,
    cost: CostModel = UNIFORM,
) -> Plan | None:
    """Cheapest plan from ``init`` to ``target``, or ``None`` if unreachable.

    Among equally cheap plans the one whose node sequence is lexicographically
    smallest is returned.  ``init == target`` yields the empty plan.
    """
    _check_nodes(utg, init, target)
    if init == target:
        return Plan((), 0)
    g = utg.compiled
    t = g.index[target]
    dist = _dist_to_target(utg, g, t, cost)
    i = g.index[init]
    if math.isinf(dist[i]):
        return None
    weights = g.weights(utg, cost)
    path = greedy_path(g.fwd_indptr, g.fwd_indices, weights, dist, i, t, _RTOL)
    nodes = [g.ids[k] for k in path]
    if cost.is_uniform:
        return Plan.from_nodes(nodes)
    total = sum(cost(utg.edges[(a, b)].label) for a, b in zip(nodes, nodes[1:]))
    return Plan.from_nodes(nodes, total)


@dataclass(frozen=True)
class ValidationReport:
    valid: bool
    failed_step: int | None = None
    reason: str | None = None

    def __bool__(self) -> bool:
        return self.valid

    def __str__(self) -> str:
        if self.valid:
            return "valid"
        where = "end of plan" if self.failed_step is None else f"step {self.failed_step}"
        return f"invalid at {where}: {self.reason}"


def validate_plan(utg: Utg, init: str, target: str, plan: Plan) -> ValidationReport:
    """Replay ``plan`` against the domain semantics.

    Each step needs ``at(from)`` and ``connected(from, to)``; the goal holds
    once some step enters ``target`` (or trivially when ``init == target`` and
    the plan is empty).
    """
    at = init
    achieved = init == target and not plan.steps
    for i, (src, dst) in enumerate(plan.steps):
        if src != at:
            return ValidationReport(False, i, "precondition at(from)")
        if (src, dst) not in utg.edges:
            return ValidationReport(False, i, "precondition connected(from, to)")
        at = dst
        if dst == target:
            achieved = True
    if not achieved:
        return ValidationReport(False, None, "goal-achieved(target) not reached")
    return ValidationReport(True)


@dataclass(frozen=True)
class ExternalPlannerSpec:
    """How to run an external planner.

    ``command`` is a shell-style template with ``{domain}``, ``{problem}`` and
    ``{plan_out}`` placeholders.  A nonzero exit whose output contains
    ``unsolvable_marker`` means the task has no solution.
    """

    command: str
    timeout: float = 60.0
    unsolvable_marker: str = "unsolvable"


def external_plan(
    spec: ExternalPlannerSpec,
    utg: Utg,
    init: str,
    target: str,
    workdir: str | Path | None = None,
) -> Plan | None:
    _check_nodes(utg, init, target)
    problem_text, table = emit_problem(utg, init, target, "navigate-task")
    with tempfile.TemporaryDirectory(dir=workdir) as tmp:
        tmp_path = Path(tmp)
        domain_path = tmp_path / "domain.pddl"
        problem_path = tmp_path / "problem.pddl"
        plan_path = tmp_path / "plan.txt"
        domain_path.write_text(emit_domain(), encoding="utf-8")
        problem_path.write_text(problem_text, encoding="utf-8")
        argv = [
            part.format(domain=domain_path, problem=problem_path, plan_out=plan_path)
            for part in shlex.split(spec.command)
        ]
        try:
            proc = subprocess.run(
                argv, cwd=tmp, capture_output=True, text=True, timeout=spec.timeout
            )
        except subprocess.TimeoutExpired:
            raise PlannerTimeout(f"planner exceeded {spec.timeout} s") from None
        if proc.returncode != 0:
            if spec.unsolvable_marker and spec.unsolvable_marker in proc.stdout + proc.stderr:
                return None
            raise PlannerCrash(proc.returncode, proc.stderr or proc.stdout)
        if not plan_path.exists():
            raise InvalidExternalPlan("planner exited cleanly but wrote no plan file")
        text = plan_path.read_text(encoding="utf-8")

    try:
        plan = parse_plan(text, table)
    except PlanParseError as exc:
        raise InvalidExternalPlan(str(exc)) from None
    report = validate_plan(utg, init, target, plan)
    if not report:
        raise InvalidExternalPlan(report)
    return plan
