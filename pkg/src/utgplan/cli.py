"""``utgplan`` command-line interface.

Exit codes: 0 success, 1 external planner failure, 2 usage or input error,
3 target unreachable, 4 simulated episode failed.  Machine-readable output
goes to stdout only; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path
from typing import Any, Sequence

from utgplan import __version__
from utgplan.errors import (
    InvalidExternalPlan,
    PlannerCrash,
    PlannerTimeout,
    UtgPlanError,
)
from utgplan.guide import render_fallback, render_guide
from utgplan.pddl import emit_domain, emit_problem, render_plan, utg_from_problem
from utgplan.planner import ExternalPlannerSpec, external_plan, find_plan
from utgplan.selector import SelectionRequest, SelectionResult, format_selection_json, select_target
from utgplan.sim import (
    POLICIES,
    Arm,
    Clock,
    EpisodeConfig,
    GroundTruthEnv,
    PerturbationConfig,
    Task,
    derive_seed,
    make_policy,
    perturb,
    run_benchmark,
    run_episode,
)
from utgplan.stats import wilcoxon_signed_rank
from utgplan.utg import Utg, load_utg, save_utg, utg_stats

EXIT_OK = 0
EXIT_PLANNER = 1
EXIT_USAGE = 2
EXIT_UNREACHABLE = 3
EXIT_FAILURE = 4


class UsageError(Exception):
    """Bad flags or input files; reported on stderr with exit code 2."""


def _read_utg(path: str) -> Utg:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return load_utg(text)
    except UtgPlanError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _emit(obj: Any) -> None:
    sys.stdout.write(json.dumps(obj, indent=2, ensure_ascii=False) + "\n")


def _check_node(utg: Utg, node_id: str, flag: str) -> None:
    if node_id not in utg.nodes:
        raise UsageError(f"{flag} {node_id!r} is not a node of the graph")


def _resolve_target(utg: Utg, target: str | None, goal: str | None) -> tuple[str, SelectionResult]:
    # an explicit id wins over goal text
    if target is not None:
        _check_node(utg, target, "--target")
        return target, SelectionResult((target,), 1.0, "target given explicitly", (1.0,))
    if not goal:
        raise UsageError("one of --target or --goal is required")
    selection = select_target(SelectionRequest(goal), utg)
    return selection.top, selection


def _parse_perturb(text: str) -> PerturbationConfig:
    parts = text.split(",")
    if len(parts) != 3:
        raise UsageError("--perturb expects three comma-separated probabilities: drop,spurious,mislabel")
    try:
        return PerturbationConfig(*(float(p) for p in parts))
    except ValueError as exc:
        raise UsageError(f"--perturb: {exc}") from None


def _load_planner_spec(path: str) -> ExternalPlannerSpec:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot load planner spec {path}: {exc}") from None
    if not isinstance(doc, dict) or not isinstance(doc.get("command"), str):
        raise UsageError(f"{path}: expected an object with a string 'command'")
    unknown = set(doc) - {"command", "timeout", "unsolvable_marker"}
    if unknown:
        raise UsageError(f"{path}: unknown keys {sorted(unknown)}")
    return ExternalPlannerSpec(**doc)


# --- subcommands -------------------------------------------------------------


def cmd_plan(args: argparse.Namespace) -> int:
    utg = _read_utg(args.utg)
    _check_node(utg, args.init, "--init")
    target, selection = _resolve_target(utg, args.target, args.goal)
    if args.planner_spec:
        spec = _load_planner_spec(args.planner_spec)
        plan = external_plan(spec, utg, args.init, target)
    else:
        plan = find_plan(utg, args.init, target)

    if plan is None:
        fallback = render_fallback(utg, args.init, args.k)
        if args.format == "text":
            sys.stdout.write(fallback)
        else:
            _emit(
                {
                    "status": "unreachable",
                    "init": args.init,
                    "target": target,
                    "selection": json.loads(format_selection_json(selection)),
                    "fallback": fallback,
                }
            )
        return EXIT_UNREACHABLE

    plan_text = render_plan(plan)
    guide = render_guide(plan, utg, args.init, selection)
    if args.format == "text":
        sys.stdout.write(plan_text + "\n" + guide)
    else:
        _emit(
            {
                "status": "found",
                "init": args.init,
                "target": target,
                "selection": json.loads(format_selection_json(selection)),
                "steps": [list(s) for s in plan.steps],
                "cost": plan.cost,
                "plan": plan_text,
                "guide": guide,
            }
        )
    return EXIT_OK


def cmd_emit_pddl(args: argparse.Namespace) -> int:
    utg = _read_utg(args.utg)
    _check_node(utg, args.init, "--init")
    _check_node(utg, args.target, "--target")
    problem, table = emit_problem(utg, args.init, args.target, args.name)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    domain_path = out / "domain.pddl"
    problem_path = out / "problem.pddl"
    domain_path.write_text(emit_domain(), encoding="utf-8")
    problem_path.write_text(problem, encoding="utf-8")
    _emit({"domain": str(domain_path), "problem": str(problem_path), "symbols": dict(table.items())})
    return EXIT_OK


def cmd_ingest(args: argparse.Namespace) -> int:
    try:
        text = Path(args.problem).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {args.problem}: {exc.strerror}") from None
    try:
        utg, init, target = utg_from_problem(text)
    except UtgPlanError as exc:
        raise UsageError(f"{args.problem}: {exc}") from None
    doc = save_utg(utg)
    if args.out:
        Path(args.out).write_text(doc, encoding="utf-8")
        _emit({"utg": args.out, "init": init, "target": target, "nodes": utg.node_count, "edges": utg.edge_count})
    else:
        sys.stdout.write(doc)
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    truth = _read_utg(args.truth)
    _check_node(truth, args.init, "--init")
    if args.target is not None:
        _check_node(truth, args.target, "--target")
    elif not args.goal:
        raise UsageError("one of --target or --goal is required")
    if args.max_steps < 1:
        raise UsageError("--max-steps must be >= 1")
    if not 0.0 <= args.p_fail < 1.0:
        raise UsageError("--p-fail must lie in [0, 1)")
    if args.static:
        static = _read_utg(args.static)
    else:
        static = perturb(truth, _parse_perturb(args.perturb), derive_seed(args.seed, "perturb"))
    cfg = EpisodeConfig(
        goal_text=args.goal or "",
        max_steps=args.max_steps,
        policy=make_policy(args.policy, not args.no_guide),
        k_fallback=args.k,
        replan_on_divergence=not args.no_replan,
        guided=not args.no_guide,
        target=args.target,
    )
    env = GroundTruthEnv(truth, args.init, args.seed, args.p_fail, not args.no_system_back)
    result = run_episode(static, env, cfg, clock=_clock(args.timing))
    if args.trace:
        Path(args.trace).write_text(result.trace_jsonl(), encoding="utf-8")
    _emit(result.to_json())
    return EXIT_OK if result.success else EXIT_FAILURE


def _clock(timing: bool) -> Clock | None:
    return time.perf_counter if timing else None


_PERTURB_KEYS = ("drop_edge_prob", "spurious_edge_prob", "mislabel_prob")
_BENCH_KEYS = {"tasks", "policies", "repetitions", "seed", "perturb", "max_steps", "p_fail", "k_fallback", "system_back"}


def _load_bench_config(path: str) -> tuple[list[Task], list[Arm], dict[str, Any]]:
    base = Path(path).parent
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise UsageError(f"{path}: expected a JSON object")
    unknown = set(doc) - _BENCH_KEYS
    if unknown:
        raise UsageError(f"{path}: unknown keys {sorted(unknown)}")
    raw_tasks = doc.get("tasks")
    if not isinstance(raw_tasks, list) or not raw_tasks:
        raise UsageError(f"{path}: 'tasks' must be a non-empty list")

    tasks = []
    for i, raw in enumerate(raw_tasks):
        where = f"{path}: tasks[{i}]"
        if not isinstance(raw, dict) or not {"utg", "init", "goal"} <= set(raw):
            raise UsageError(f"{where} needs 'utg', 'init' and 'goal'")
        truth = _read_utg(str(base / raw["utg"]))
        init = raw["init"]
        if init not in truth.nodes:
            raise UsageError(f"{where}: init {init!r} is not a node")
        goal = raw["goal"]
        if isinstance(goal, str) and goal:
            task = Task(raw.get("name", f"{Path(raw['utg']).stem}:{init}:{goal}"), truth, init, goal_text=goal)
        elif isinstance(goal, dict) and set(goal) == {"target"} and goal["target"] in truth.nodes:
            target = goal["target"]
            task = Task(raw.get("name", f"{Path(raw['utg']).stem}:{init}->{target}"), truth, init, target=target)
        else:
            raise UsageError(f"{where}: 'goal' must be text or {{\"target\": <node id>}}")
        tasks.append(task)

    policies = doc.get("policies", ["plan-follower", "uniform-random"])
    if not isinstance(policies, list) or not policies:
        raise UsageError(f"{path}: 'policies' must be a non-empty list")
    arms = [Arm.parse(p) for p in policies]

    perturb_doc = doc.get("perturb", {})
    if isinstance(perturb_doc, list):
        perturb_doc = dict(zip(_PERTURB_KEYS, perturb_doc))
    if not isinstance(perturb_doc, dict):
        raise UsageError(f"{path}: 'perturb' must be an object or a 3-element list")
    unknown = sorted(set(perturb_doc) - set(_PERTURB_KEYS))
    if unknown:
        raise UsageError(f"{path}: unknown perturb keys {unknown}; expected {list(_PERTURB_KEYS)}")
    try:
        perturbation = PerturbationConfig(**perturb_doc)
    except TypeError as exc:
        raise UsageError(f"{path}: perturb: {exc}") from None

    options = {
        "repetitions": doc.get("repetitions", 3),
        "seed": doc.get("seed", 0),
        "perturbation": perturbation,
        "max_steps": doc.get("max_steps"),
        "p_fail": doc.get("p_fail", 0.0),
        "k_fallback": doc.get("k_fallback", 1),
        "system_back": bool(doc.get("system_back", True)),
    }
    for key in ("repetitions", "seed", "k_fallback"):
        if isinstance(options[key], bool) or not isinstance(options[key], int):
            raise UsageError(f"{path}: '{key}' must be an integer")
    return tasks, arms, options


def cmd_bench(args: argparse.Namespace) -> int:
    tasks, arms, options = _load_bench_config(args.config)
    report = run_benchmark(tasks, arms, clock=_clock(args.timing), **options)
    if args.format == "text":
        sys.stdout.write(report.to_table())
    else:
        _emit(report.to_json())
    return EXIT_OK


def _read_column(path: str) -> list[float]:
    values = []
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    for n, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            values.append(float(line))
        except ValueError:
            raise UsageError(f"{path}:{n}: not a number: {line!r}") from None
    return values


def cmd_stats(args: argparse.Namespace) -> int:
    if args.paired:
        xs, ys = (_read_column(p) for p in args.paired)
        if len(xs) != len(ys):
            raise UsageError(f"--paired columns differ in length: {len(xs)} vs {len(ys)}")
        try:
            res = wilcoxon_signed_rank(zip(xs, ys), method=args.method, alternative=args.alternative)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        out = {"statistic": res.statistic, "pvalue": res.pvalue, "n": res.n, "method": res.method, "alternative": args.alternative}
        if args.format == "text":
            sys.stdout.write(f"W={res.statistic:g} p={res.pvalue:.6g} n={res.n} method={res.method}\n")
        else:
            _emit(out)
        return EXIT_OK

    if not args.utg:
        raise UsageError("stats needs at least one graph file or --paired A B")
    rows = []
    for path in args.utg:
        nodes, edges = utg_stats(_read_utg(path))
        rows.append({"file": path, "nodes": nodes, "edges": edges})
    if args.format == "text":
        for row in rows:
            sys.stdout.write(f"{row['file']} {row['nodes']} {row['edges']}\n")
    else:
        _emit(rows)
    return EXIT_OK


# --- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="utgplan", description="Plan navigation paths over UI transition graphs.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="compute an optimal plan and print it with a navigation guide")
    p.add_argument("utg", help="graph JSON file")
    p.add_argument("--init", required=True, help="start node id")
    p.add_argument("--target", help="target node id (takes precedence over --goal)")
    p.add_argument("--goal", help="natural-language goal resolved by the node selector")
    p.add_argument("--k", type=int, default=1, help="fallback neighbourhood radius (default 1)")
    p.add_argument("--planner-spec", help="JSON file describing an external PDDL planner")
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("emit-pddl", help="write domain.pddl and problem.pddl")
    p.add_argument("utg")
    p.add_argument("--init", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--name", default="navigate-task", help="problem name")
    p.set_defaults(func=cmd_emit_pddl)

    p = sub.add_parser("ingest", help="rebuild a graph JSON file from a PDDL problem")
    p.add_argument("problem")
    p.add_argument("--out", help="output path (default: stdout)")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("simulate", help="run one episode against a ground-truth graph")
    p.add_argument("truth", help="ground-truth graph JSON file")
    p.add_argument("--init", required=True)
    p.add_argument("--target")
    p.add_argument("--goal")
    p.add_argument("--policy", choices=sorted(POLICIES), default="plan-follower")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-steps", type=int, default=30)
    p.add_argument("--perturb", default="0,0,0", help="drop,spurious,mislabel probabilities")
    p.add_argument("--static", help="use this graph as the agent's static graph instead of perturbing the truth")
    p.add_argument("--p-fail", type=float, default=0.0)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--no-guide", action="store_true", help="run the policy without plans or guide text")
    p.add_argument("--no-replan", action="store_true", help="finish a plan even after a divergence")
    p.add_argument("--no-system-back", action="store_true", help="disable the platform back button")
    p.add_argument("--trace", help="write the transition trace as JSON lines")
    p.add_argument("--timing", action="store_true", help="report wall-clock time (makes output nondeterministic)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bench", help="run a benchmark described by a JSON config")
    p.add_argument("config")
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("--timing", action="store_true")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("stats", help="node/edge counts, or a paired Wilcoxon test")
    p.add_argument("utg", nargs="*")
    p.add_argument("--paired", nargs=2, metavar=("A", "B"), help="two files with one number per line")
    p.add_argument("--method", choices=("auto", "exact", "normal"), default="auto")
    p.add_argument("--alternative", choices=("two-sided", "less", "greater"), default="two-sided")
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "k", 1) < 1:
        print("error: --k must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PlannerTimeout, PlannerCrash, InvalidExternalPlan) as exc:
        print(f"planner error: {exc}", file=sys.stderr)
        return EXIT_PLANNER
    except UtgPlanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
