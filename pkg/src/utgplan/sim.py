"""Simulated apps and the plan-guided exploration loop.

A :class:`GroundTruthEnv` holds an app's real transition graph and moves when
an action matching one of the current screen's outgoing transitions is
performed.  :func:`run_episode` drives an :class:`ExplorerPolicy` through the
environment: it selects a target node from the goal text, plans on the
agent's own (possibly inaccurate) graph, follows the plan while folding every
observed transition back into that graph, and falls back to a neighbourhood
summary when no plan exists.
"""

from __future__ import annotations

import json
import random
import time
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Callable, Iterable, Protocol, Sequence

from utgplan.datasets import calendar_utg
from utgplan.errors import ConfigError
from utgplan.guide import render_fallback, render_guide
from utgplan.pddl import Plan
from utgplan.planner import find_plan
from utgplan.selector import (
    CachingProvider,
    EmbeddingProvider,
    LexicalEmbedding,
    SelectionRequest,
    SelectionResult,
    select_target,
)
from utgplan.utg import (
    Action,
    DeltaKind,
    EdgeKey,
    TransitionEdge,
    UiNode,
    UserEvent,
    Utg,
    UtgDelta,
    Widget,
    action_to_json,
    build_utg,
    observe_transition,
)

Clock = Callable[[], float]


def derive_seed(seed: int, *parts: object) -> int:
    """Independent, platform-stable sub-seed for ``parts``."""
    return random.Random(":".join(map(str, (seed, *parts)))).getrandbits(63)


# --- static-graph perturbation ----------------------------------------------


@dataclass(frozen=True)
class PerturbationConfig:
    drop_edge_prob: float = 0.0
    spurious_edge_prob: float = 0.0
    mislabel_prob: float = 0.0

    def __post_init__(self) -> None:
        for name in ("drop_edge_prob", "spurious_edge_prob", "mislabel_prob"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {value}")


def perturb(truth: Utg, cfg: PerturbationConfig, seed: int) -> Utg:
    """Simulate an imprecise static analysis of ``truth``.

    Each real edge is dropped with ``drop_edge_prob``; each surviving edge has
    its label replaced by a nonexistent widget with ``mislabel_prob``; for
    each real edge a spurious edge between a random ordered node pair is
    added with ``spurious_edge_prob``.  Nodes are never removed.
    """
    rng = random.Random(seed)
    node_ids = list(truth.nodes)
    edges: dict[EdgeKey, TransitionEdge] = {}
    spurious: list[TransitionEdge] = []
    for i, edge in enumerate(truth.edges.values()):
        drop = rng.random() < cfg.drop_edge_prob
        mislabel = rng.random() < cfg.mislabel_prob
        add_spurious = rng.random() < cfg.spurious_edge_prob
        src_pick, dst_pick = rng.randrange(len(node_ids)), rng.randrange(len(node_ids))
        label_pick = rng.random()
        if not drop:
            label = edge.label
            if mislabel:
                label = Action(Widget(f"{edge.src}#ghost{i}", edge.label.widget.widget_class), edge.label.event)
            edges[edge.key] = replace(edge, label=label)
        if add_spurious:
            src, dst = node_ids[src_pick], node_ids[dst_pick]
            choices = truth.nodes[src].actions
            if choices:
                label = choices[int(label_pick * len(choices))]
            else:
                label = Action(Widget(f"{src}#ghost{i}"), UserEvent("click"))
            spurious.append(TransitionEdge(src, dst, label))
    for edge in spurious:
        if edge.key not in truth.edges and edge.key not in edges:
            edges[edge.key] = edge
    nodes = [UiNode(n.id, (), n.label_text) for n in truth.nodes.values()]
    return build_utg(nodes, edges.values(), truth.app_name)


# --- environment ------------------------------------------------------------


SYSTEM_BACK = Action(Widget("system_back", "Back"), UserEvent("back"))


class GroundTruthEnv:
    """The real app.  ``act`` mutates ``current`` and returns it.

    With ``system_back`` the platform back button is available whenever the
    screen history is non-empty and returns to the previous screen.  It is a
    property of the device rather than of the app, so it is not part of
    ``truth``.
    """

    def __init__(
        self,
        truth: Utg,
        current: str,
        seed: int = 0,
        p_fail: float = 0.0,
        system_back: bool = True,
    ) -> None:
        if current not in truth.nodes:
            raise ConfigError(f"start node {current!r} is not in the ground-truth graph")
        if not 0.0 <= p_fail < 1.0:
            raise ConfigError("p_fail must lie in [0, 1)")
        self.truth = truth
        self.start = current
        self.current = current
        self.seed = seed
        self.p_fail = p_fail
        self.system_back = system_back
        self.rng = random.Random(seed)
        self.history: list[str] = []
        self.went_back = False
        self._moves: dict[tuple[str, Action], str] = {}
        for node_id in truth.nodes:
            for edge in truth.out_edges(node_id):
                self._moves.setdefault((node_id, edge.label), edge.dst)

    def screen(self) -> UiNode:
        return self.truth.nodes[self.current]

    def available_actions(self) -> tuple[Action, ...]:
        actions = self.screen().actions
        if self.system_back and self.history and SYSTEM_BACK not in actions:
            actions += (SYSTEM_BACK,)
        return actions

    def act(self, action: Action | None) -> str:
        self.went_back = False
        misfire = self.rng.random() < self.p_fail
        if action is None or misfire:
            return self.current
        dst = self._moves.get((self.current, action))
        if dst is not None:
            if dst != self.current:
                self.history.append(self.current)
                self.current = dst
        elif action == SYSTEM_BACK and self.system_back and self.history:
            self.current = self.history.pop()
            self.went_back = True
        return self.current

    def copy(self) -> GroundTruthEnv:
        """Fresh environment at the start node with the same seed."""
        return GroundTruthEnv(self.truth, self.start, self.seed, self.p_fail, self.system_back)


def env_act(env: GroundTruthEnv, action: Action | None) -> str:
    return env.act(action)


def evaluate_goal(current: str, target: str) -> bool:
    return current == target


# --- policies -------------------------------------------------------------------


@dataclass(frozen=True)
class Observation:
    """What the explorer sees before acting.

    ``available_actions`` are the actions on the real screen (plus the system
    back button when there is somewhere to go back to); ``utg`` is the
    agent's current graph; ``planned_action`` and ``expected_node`` are set
    while a plan is being followed.
    """

    node_id: str
    available_actions: tuple[Action, ...]
    utg: Utg
    planned_action: Action | None = None
    expected_node: str | None = None


class ExplorerPolicy(Protocol):
    name: str

    def reset(self, rng: random.Random) -> None: ...

    def decide(self, obs: Observation, guide: str | None) -> Action | None: ...


class UniformRandom:
    name = "uniform-random"

    def __init__(self) -> None:
        self.rng = random.Random(0)

    def reset(self, rng: random.Random) -> None:
        self.rng = rng

    def decide(self, obs: Observation, guide: str | None) -> Action | None:
        if not obs.available_actions:
            return None
        return self.rng.choice(obs.available_actions)


class GreedyNovelty:
    """Least-tried action first, preferring ones not known to lead to visited screens.

    Actions that were seen to leave the screen unchanged are tried last.
    """

    name = "greedy-novelty"

    def __init__(self) -> None:
        self.tried: dict[tuple[str, Action], int] = {}
        self.visited: set[str] = set()
        self.no_ops: set[tuple[str, Action]] = set()
        self._last: tuple[str, Action] | None = None

    def reset(self, rng: random.Random) -> None:
        self.tried = {}
        self.visited = set()
        self.no_ops = set()
        self._last = None

    def _settle(self, node_id: str) -> None:
        # still on the screen where the previous action was taken
        if self._last is not None and self._last[0] == node_id:
            self.no_ops.add(self._last)
        self._last = None

    def record(self, node_id: str, action: Action) -> None:
        self._settle(node_id)
        self.visited.add(node_id)
        key = (node_id, action)
        self.tried[key] = self.tried.get(key, 0) + 1
        self._last = key

    def decide(self, obs: Observation, guide: str | None) -> Action | None:
        self._settle(obs.node_id)
        self.visited.add(obs.node_id)
        if not obs.available_actions:
            return None
        known = {e.label: e.dst for e in obs.utg.out_edges(obs.node_id)} if obs.node_id in obs.utg.nodes else {}

        def rank(item: tuple[int, Action]) -> tuple[int, int, int, int]:
            i, action = item
            key = (obs.node_id, action)
            dst = known.get(action)
            # back always returns to a screen already seen
            seen = 1 if action == SYSTEM_BACK or (dst is not None and dst in self.visited) else 0
            return (key in self.no_ops, self.tried.get(key, 0), seen, i)

        _, choice = min(enumerate(obs.available_actions), key=rank)
        self.record(obs.node_id, choice)
        return choice


class PlanFollower:
    """Performs the planned action when there is one; otherwise defers to ``fallback``."""

    name = "plan-follower"

    def __init__(self, fallback: ExplorerPolicy | None = None) -> None:
        self.fallback = fallback if fallback is not None else GreedyNovelty()

    def reset(self, rng: random.Random) -> None:
        self.fallback.reset(rng)

    def decide(self, obs: Observation, guide: str | None) -> Action | None:
        if obs.planned_action is not None:
            if isinstance(self.fallback, GreedyNovelty):
                self.fallback.record(obs.node_id, obs.planned_action)
            return obs.planned_action
        return self.fallback.decide(obs, guide)


POLICIES: dict[str, Callable[[], ExplorerPolicy]] = {
    "plan-follower": PlanFollower,
    "uniform-random": UniformRandom,
    "greedy-novelty": GreedyNovelty,
}


def make_policy(name: str, guided: bool = False) -> ExplorerPolicy:
    """Instantiate a built-in policy; ``guided`` wraps it in a :class:`PlanFollower`."""
    try:
        policy = POLICIES[name]()
    except KeyError:
        raise ConfigError(f"unknown policy {name!r}; choose from {sorted(POLICIES)}") from None
    if guided and not isinstance(policy, PlanFollower):
        return PlanFollower(policy)
    return policy


# --- episodes -------------------------------------------------------------------


class Outcome(str, Enum):
    SUCCESS = "Success"
    FAILURE = "Failure"


@dataclass(frozen=True)
class TraceStep:
    src: str
    action: Action | None
    dst: str

    def to_json(self) -> dict[str, Any]:
        return {
            "src": self.src,
            "action": action_to_json(self.action) if self.action is not None else None,
            "dst": self.dst,
        }


@dataclass
class EpisodeConfig:
    goal_text: str = ""
    max_steps: int = 30
    policy: ExplorerPolicy = field(default_factory=PlanFollower)
    provider: EmbeddingProvider | None = None
    k_fallback: int = 1
    replan_on_divergence: bool = True
    guided: bool = True
    target: str | None = None

    def __post_init__(self) -> None:
        if self.max_steps < 1:
            raise ConfigError("max_steps must be >= 1")
        if self.k_fallback < 1:
            raise ConfigError("k_fallback must be >= 1")
        if not self.goal_text and self.target is None:
            raise ConfigError("either goal_text or target is required")


@dataclass
class EpisodeResult:
    outcome: Outcome
    steps_taken: int
    wall_time: float | None
    init: str
    target: str
    deltas: list[UtgDelta] = field(default_factory=list)
    trace: list[TraceStep] = field(default_factory=list)
    final_utg: Utg | None = None

    @property
    def success(self) -> bool:
        return self.outcome is Outcome.SUCCESS

    @property
    def final_node(self) -> str:
        return self.trace[-1].dst if self.trace else self.init

    def to_json(self) -> dict[str, Any]:
        return {
            "outcome": self.outcome.value,
            "steps_taken": self.steps_taken,
            "wall_time_s": self.wall_time,
            "init": self.init,
            "target": self.target,
            "final_node": self.final_node,
            "deltas": [
                {
                    "kind": d.kind.value,
                    "edge": list(d.edge),
                    "old_label": action_to_json(d.old_label) if d.old_label is not None else None,
                }
                for d in self.deltas
            ],
            "trace": [t.to_json() for t in self.trace],
        }

    def trace_jsonl(self) -> str:
        return "".join(json.dumps(t.to_json(), sort_keys=True) + "\n" for t in self.trace)


class _Episode:
    """Mutable state of one run of the loop; see :func:`run_episode`."""

    def __init__(self, static_utg: Utg, env: GroundTruthEnv, cfg: EpisodeConfig) -> None:
        self.utg = static_utg
        self.env = env
        self.cfg = cfg
        self.current = env.current
        self.steps = 0
        self.deltas: list[UtgDelta] = []
        self.trace: list[TraceStep] = []
        # edge labels that failed when followed; ignored by the planner until relabelled
        self.blocked: dict[EdgeKey, Action] = {}
        self.selection: SelectionResult | None = None
        self.target = cfg.target or ""
        self._provider = CachingProvider(cfg.provider or LexicalEmbedding())
        self._selected_on: Utg | None = None

    def select(self) -> None:
        if self.cfg.target is not None:
            self.selection = SelectionResult((self.cfg.target,), 1.0, "target given explicitly", (1.0,))
            self.target = self.cfg.target
            return
        if self._selected_on is self.utg:
            return
        self.selection = select_target(SelectionRequest(self.cfg.goal_text), self.utg, self._provider)
        self.target = self.selection.top
        self._selected_on = self.utg

    def planning_view(self) -> Utg:
        stale = [k for k, a in self.blocked.items() if k in self.utg.edges and self.utg.edges[k].label == a]
        return self.utg.without_edges(stale)

    def observation(self, planned: Action | None = None, expected: str | None = None) -> Observation:
        return Observation(self.current, self.env.available_actions(), self.utg, planned, expected)

    def step(self, action: Action | None) -> str:
        src = self.current
        dst = self.env.act(action)
        self.steps += 1
        self.trace.append(TraceStep(src, action, dst))
        # going back is history-dependent, so it is not folded into the graph
        if action is not None and not self.env.went_back:
            self.utg, delta = observe_transition(self.utg, src, action, self.env.truth.nodes[dst])
            if delta.kind is not DeltaKind.NO_CHANGE:
                self.deltas.append(delta)
            if dst != src and self.blocked.get((src, dst)) == action:
                del self.blocked[(src, dst)]
        self.current = dst
        return dst

    def done(self) -> bool:
        return evaluate_goal(self.current, self.target)

    def follow(self, plan: Plan) -> bool:
        """Execute ``plan``; returns True when the goal was reached."""
        for i, (src, dst) in enumerate(plan.steps):
            if self.steps >= self.cfg.max_steps:
                return False
            action = self.utg.edges[(src, dst)].label
            obs = self.observation(action, dst)
            at_src = src == self.current
            if action not in obs.available_actions:
                # the planned widget is not on screen
                if at_src:
                    self.blocked[(src, dst)] = action
                return False
            guide = render_guide(Plan(plan.steps[i:]), self.utg, src, self.selection) if at_src else None
            chosen = self.cfg.policy.decide(obs, guide)
            landed = self.step(chosen)
            if at_src and chosen == action and landed != dst:
                self.blocked[(src, dst)] = action
            if self.done():
                return True
            if landed != dst and self.cfg.replan_on_divergence:
                return False
        return False

    def explore(self) -> None:
        text = render_fallback(self.utg, self.current, self.cfg.k_fallback) if self.cfg.guided else None
        self.step(self.cfg.policy.decide(self.observation(), text))


def run_episode(
    static_utg: Utg,
    env: GroundTruthEnv,
    cfg: EpisodeConfig,
    clock: Clock | None = time.perf_counter,
) -> EpisodeResult:
    """Run the select / plan / act / refine loop until success or budget exhaustion.

    One step is one call to the environment.  With ``cfg.guided`` false the
    policy acts on raw observations only (no plans, no guide text).
    """
    if env.current not in static_utg.nodes:
        raise ConfigError(f"start node {env.current!r} is not in the agent's graph")
    if cfg.target is not None and cfg.target not in static_utg.nodes:
        raise ConfigError(f"target {cfg.target!r} is not in the agent's graph")
    start = clock() if clock is not None else None
    cfg.policy.reset(random.Random(derive_seed(env.seed, "policy")))
    ep = _Episode(static_utg, env, cfg)
    init = env.current
    ep.select()

    success = ep.done()
    while not success and ep.steps < cfg.max_steps:
        if cfg.target is None:
            ep.select()
            if ep.done():
                success = True
                break
        plan = find_plan(ep.planning_view(), ep.current, ep.target) if cfg.guided else None
        if plan is not None and plan.steps:
            success = ep.follow(plan)
        else:
            ep.explore()
            success = ep.done()

    elapsed = clock() - start if clock is not None and start is not None else None
    return EpisodeResult(
        outcome=Outcome.SUCCESS if success else Outcome.FAILURE,
        steps_taken=ep.steps,
        wall_time=elapsed,
        init=init,
        target=ep.target,
        deltas=ep.deltas,
        trace=ep.trace,
        final_utg=ep.utg,
    )


def replay_trace(truth: Utg, start: str, trace: Sequence[TraceStep], system_back: bool = True) -> str:
    """Re-run the recorded actions on a fresh noise-free copy of ``truth``."""
    env = GroundTruthEnv(truth, start, system_back=system_back)
    for step in trace:
        if step.src != env.current:
            raise ValueError(f"trace step starts at {step.src!r} but replay is at {env.current!r}")
        if step.dst == step.src:
            continue  # failed or ineffective action
        env.act(step.action)
    return env.current


# --- random apps -------------------------------------------------------------

_WORDS = (
    "account", "about", "album", "alarm", "archive", "backup", "calendar", "camera",
    "cart", "chat", "contacts", "detail", "download", "editor", "event", "export",
    "feed", "filter", "folder", "gallery", "help", "history", "home", "inbox",
    "language", "library", "login", "map", "media", "message", "note", "notification",
    "order", "payment", "player", "playlist", "policy", "privacy", "profile", "recipe",
    "reminder", "search", "security", "settings", "share", "storage", "task", "theme",
    "timer", "track", "upload", "wallet", "weather", "widget",
)


def random_utg(
    rng: random.Random,
    n: int,
    density: float,
    strongly_connected: bool = False,
    dead_actions: int = 0,
    app_name: str = "random-app",
) -> Utg:
    """Random app graph with unique three-word screen labels.

    With ``strongly_connected`` a random Hamiltonian cycle is laid down first.
    ``dead_actions`` extra widgets per screen lead nowhere.
    """
    ids = [f"S{i:03d}" for i in range(n)]
    labels: set[str] = set()
    while len(labels) < n:
        labels.add(" ".join(rng.sample(_WORDS, 3)))
    label_list = sorted(labels)
    rng.shuffle(label_list)

    pairs: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    if strongly_connected and n > 1:
        order = list(range(n))
        rng.shuffle(order)
        for a, b in zip(order, order[1:] + order[:1]):
            pairs.append((a, b))
            seen.add((a, b))
    for a in range(n):
        for b in range(n):
            if (a, b) not in seen and rng.random() < density:
                pairs.append((a, b))
                seen.add((a, b))

    # widget numbering and screen order must not reveal which edges form the cycle
    rng.shuffle(pairs)
    edges = []
    counter = [0] * n
    screen: list[list[Action]] = [[Action(Widget(f"d{j}", "TextView")) for j in range(dead_actions)] for _ in range(n)]
    for a, b in pairs:
        counter[a] += 1
        action = Action(Widget(f"w{counter[a]}", "Button"))
        screen[a].append(action)
        edges.append(TransitionEdge(ids[a], ids[b], action))
    nodes = []
    for i in range(n):
        rng.shuffle(screen[i])
        nodes.append(UiNode(ids[i], tuple(screen[i]), label_list[i]))
    return build_utg(nodes, edges, app_name)


@dataclass(frozen=True)
class Task:
    name: str
    truth: Utg
    init: str
    goal_text: str = ""
    target: str | None = None


def random_task_suite(
    n_tasks: int = 10,
    seed: int = 0,
    min_nodes: int = 8,
    max_nodes: int = 30,
    min_distance: int = 3,
) -> list[Task]:
    """Strongly connected random apps, each with a goal at least ``min_distance`` steps away."""
    tasks = []
    rng = random.Random(seed)
    while len(tasks) < n_tasks:
        n = rng.randint(min_nodes, max_nodes)
        utg = random_utg(rng, n, min(0.3, 2.0 / n), strongly_connected=True, dead_actions=rng.randint(0, 2))
        init = rng.choice(list(utg.nodes))
        candidates = sorted(
            node for node, d in hop_distances(utg, init).items() if d >= min_distance
        )
        if not candidates:
            continue
        target = rng.choice(candidates)
        tasks.append(Task(f"random-{len(tasks):02d}", utg, init, utg.nodes[target].label_text, target))
    return tasks


def hop_distances(utg: Utg, init: str) -> dict[str, int]:
    """Hop distance from ``init`` to every node it can reach."""
    g = utg.compiled
    dist, _ = g.bfs(g.index[init])
    return {g.ids[i]: d for i, d in enumerate(dist) if d >= 0}


def calendar_task() -> Task:
    return Task(
        "calendar-manage-event-types",
        calendar_utg(),
        "SplashActivity",
        "manage event types",
        "ManageEventTypesActivity",
    )


# --- benchmarks --------------------------------------------------------------


@dataclass(frozen=True)
class Arm:
    policy: str
    guided: bool

    @property
    def label(self) -> str:
        return f"{self.policy}{'+plan' if self.guided else ''}"

    @classmethod
    def parse(cls, spec: Any) -> Arm:
        if isinstance(spec, str):
            if spec not in POLICIES:
                raise ConfigError(f"unknown policy {spec!r}")
            return cls(spec, spec == "plan-follower")
        if isinstance(spec, dict) and "policy" in spec:
            name = spec["policy"]
            if name not in POLICIES:
                raise ConfigError(f"unknown policy {name!r}")
            return cls(name, bool(spec.get("guided", name == "plan-follower")))
        raise ConfigError(f"cannot parse policy entry {spec!r}")


@dataclass(frozen=True)
class Cell:
    task: str
    policy: str
    episodes: int
    successes: int
    mean_steps: float | None
    mean_steps_all: float
    mean_time_s: float | None

    @property
    def success_rate(self) -> float:
        return self.successes / self.episodes

    def to_json(self) -> dict[str, Any]:
        return {
            "task": self.task,
            "policy": self.policy,
            "episodes": self.episodes,
            "success_rate": self.success_rate,
            "mean_steps": self.mean_steps,
            "mean_steps_all": self.mean_steps_all,
            "mean_time_s": self.mean_time_s,
        }


@dataclass(frozen=True)
class BenchmarkReport:
    cells: tuple[Cell, ...]
    seed: int
    repetitions: int
    perturbation: PerturbationConfig

    def cell(self, task: str, policy: str) -> Cell:
        for c in self.cells:
            if c.task == task and c.policy == policy:
                return c
        raise KeyError((task, policy))

    def to_json(self) -> dict[str, Any]:
        return {
            "seed": self.seed,
            "repetitions": self.repetitions,
            "perturbation": {
                "drop_edge_prob": self.perturbation.drop_edge_prob,
                "spurious_edge_prob": self.perturbation.spurious_edge_prob,
                "mislabel_prob": self.perturbation.mislabel_prob,
            },
            "cells": [c.to_json() for c in self.cells],
        }

    def to_table(self) -> str:
        header = ("task", "policy", "success_rate", "mean_steps", "mean_time_s")
        rows = [header]
        for c in self.cells:
            rows.append(
                (
                    c.task,
                    c.policy,
                    f"{c.success_rate:.2f}",
                    "-" if c.mean_steps is None else f"{c.mean_steps:.2f}",
                    "-" if c.mean_time_s is None else f"{c.mean_time_s:.4f}",
                )
            )
        widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
        lines = ["  ".join(v.ljust(w) if i < 2 else v.rjust(w) for i, (v, w) in enumerate(zip(r, widths))).rstrip() for r in rows]
        return "\n".join(lines) + "\n"


def _mean(values: Iterable[float]) -> float | None:
    vals = list(values)
    return sum(vals) / len(vals) if vals else None


def run_benchmark(
    tasks: Sequence[Task],
    arms: Sequence[Arm],
    repetitions: int,
    seed: int,
    perturbation: PerturbationConfig = PerturbationConfig(),
    max_steps: int | None = None,
    p_fail: float = 0.0,
    k_fallback: int = 1,
    replan_on_divergence: bool = True,
    provider: EmbeddingProvider | None = None,
    clock: Clock | None = time.perf_counter,
    system_back: bool = True,
) -> BenchmarkReport:
    """Run every arm on every task ``repetitions`` times.

    Within one (task, repetition) every arm sees the same perturbed static
    graph and the same environment seed, so arms are compared on paired
    conditions.  ``max_steps`` defaults to twice the task's node count.
    """
    if repetitions < 1:
        raise ConfigError("repetitions must be >= 1")
    if not tasks:
        raise ConfigError("at least one task is required")
    if not arms:
        raise ConfigError("at least one policy is required")
    results: dict[tuple[int, int], list[EpisodeResult]] = {}
    for t, task in enumerate(tasks):
        budget = max_steps if max_steps is not None else 2 * task.truth.node_count
        for r in range(repetitions):
            static = perturb(task.truth, perturbation, derive_seed(seed, t, r, "perturb"))
            env_seed = derive_seed(seed, t, r, "env")
            for a, arm in enumerate(arms):
                cfg = EpisodeConfig(
                    goal_text=task.goal_text,
                    max_steps=budget,
                    policy=make_policy(arm.policy, arm.guided),
                    provider=provider,
                    k_fallback=k_fallback,
                    replan_on_divergence=replan_on_divergence,
                    guided=arm.guided,
                    target=task.target if not task.goal_text else None,
                )
                env = GroundTruthEnv(task.truth, task.init, env_seed, p_fail, system_back)
                results.setdefault((t, a), []).append(run_episode(static, env, cfg, clock))

    cells = []
    for t, task in enumerate(tasks):
        for a, arm in enumerate(arms):
            eps = results[(t, a)]
            wins = [e for e in eps if e.success]
            times = [e.wall_time for e in eps if e.wall_time is not None]
            cells.append(
                Cell(
                    task=task.name,
                    policy=arm.label,
                    episodes=len(eps),
                    successes=len(wins),
                    mean_steps=_mean(e.steps_taken for e in wins),
                    mean_steps_all=sum(e.steps_taken for e in eps) / len(eps),
                    mean_time_s=_mean(times) if len(times) == len(eps) else None,
                )
            )
    return BenchmarkReport(tuple(cells), seed, repetitions, perturbation)
