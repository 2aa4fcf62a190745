"""PDDL emission for UTG navigation problems and plan-file parsing.

Every navigation task shares one domain (``utg-automation``) with a single
``navigate`` operator; a task's problem file lists the graph's nodes as
objects, its edges as ``connected`` facts, the start as ``at`` and the target
as ``goal-node``.  Planner output is a list of ``(navigate from to)`` lines,
optionally followed by a ``; cost = N (unit cost)`` comment.
"""

from __future__ import annotations

import re
import string
from dataclasses import dataclass
from typing import Iterator

from utgplan.errors import (
    ChainBroken,
    CostMismatch,
    MalformedPlanLine,
    SexprError,
    UnknownNode,
    UnknownSymbol,
)
from utgplan.utg import EdgeKey, EdgeOrigin, TransitionEdge, UiNode, Utg, build_utg, click

DOMAIN_NAME = "utg-automation"

# :conditional-effects is required because navigate uses a `when` effect.
DOMAIN_PDDL = """\
(define (domain utg-automation)
  (:requirements :strips :typing :conditional-effects)

  (:types
    node - object
  )

  (:predicates
    (at ?n - node)
    (connected ?from - node ?to - node)
    (visited ?n - node)
    (goal-node ?n - node)
    (goal-achieved ?n - node)
  )

  (:action navigate
    :parameters (?from - node ?to - node)
    :precondition (and
      (at ?from)
      (connected ?from ?to)
    )
    :effect (and
      (not (at ?from))
      (at ?to)
      (visited ?to)
      (when (goal-node ?to) (goal-achieved ?to))
    )
  )
)
"""


def emit_domain() -> str:
    return DOMAIN_PDDL


# --- s-expressions -----------------------------------------------------------

Sexpr = str | list["Sexpr"]

_TOKEN = re.compile(r"\(|\)|[^\s()]+")


def tokenize_pddl(text: str) -> list[str]:
    """Split PDDL text into parentheses and atoms, dropping ``;`` comments."""
    tokens: list[str] = []
    for line in text.splitlines():
        tokens.extend(_TOKEN.findall(line.split(";", 1)[0]))
    return tokens


def read_sexprs(text: str) -> list[Sexpr]:
    """Parse every top-level form in ``text``."""
    stack: list[list[Sexpr]] = [[]]
    for tok in tokenize_pddl(text):
        if tok == "(":
            stack.append([])
        elif tok == ")":
            if len(stack) == 1:
                raise SexprError("unbalanced ')'")
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(tok)
    if len(stack) != 1:
        raise SexprError(f"{len(stack) - 1} unclosed '('")
    return stack[0]


def _sections(form: list[Sexpr]) -> Iterator[tuple[str, list[Sexpr]]]:
    for item in form:
        if isinstance(item, list) and item and isinstance(item[0], str) and item[0].startswith(":"):
            yield item[0].lower(), item[1:]


@dataclass(frozen=True)
class ProblemFacts:
    """Set-level view of a parsed problem file."""

    name: str
    domain: str
    objects: frozenset[str]
    init: frozenset[tuple[str, ...]]
    goal: frozenset[tuple[str, ...]]


def _atoms(items: list[Sexpr]) -> frozenset[tuple[str, ...]]:
    facts = set()
    for item in items:
        if not isinstance(item, list) or not all(isinstance(t, str) for t in item):
            raise SexprError(f"expected a flat atom, got {item!r}")
        facts.add(tuple(item))  # type: ignore[arg-type]
    return frozenset(facts)


def read_problem(text: str) -> ProblemFacts:
    forms = read_sexprs(text)
    if len(forms) != 1 or not isinstance(forms[0], list) or forms[0][:1] != ["define"]:
        raise SexprError("expected a single (define ...) form")
    form = forms[0]
    head = form[1]
    if not isinstance(head, list) or len(head) != 2 or head[0] != "problem":
        raise SexprError("expected (problem <name>)")
    name = head[1]
    domain = ""
    objects: set[str] = set()
    init: frozenset[tuple[str, ...]] = frozenset()
    goal: frozenset[tuple[str, ...]] = frozenset()
    for key, body in _sections(form):
        if key == ":domain":
            domain = str(body[0])
        elif key == ":objects":
            names = [t for t in body if isinstance(t, str)]
            pending: list[str] = []
            i = 0
            while i < len(names):
                if names[i] == "-":
                    objects.update(pending)
                    pending = []
                    i += 2
                else:
                    pending.append(names[i])
                    i += 1
            objects.update(pending)
        elif key == ":init":
            init = _atoms(body)
        elif key == ":goal":
            goal_body = body[0] if len(body) == 1 else body
            if isinstance(goal_body, list) and goal_body[:1] == ["and"]:
                goal = _atoms(goal_body[1:])
            else:
                goal = _atoms([goal_body])
    return ProblemFacts(str(name), domain, frozenset(objects), init, goal)


# --- identifiers -----------------------------------------------------------


class SymbolTable:
    """Bidirectional node-id <-> PDDL symbol map.

    PDDL symbols are case-insensitive and planners commonly print them in
    lower case, so symbol lookups and collision checks ignore case.
    """

    def __init__(self) -> None:
        self._symbol: dict[str, str] = {}
        self._node: dict[str, str] = {}

    def __len__(self) -> int:
        return len(self._symbol)

    def __contains__(self, node_id: object) -> bool:
        return node_id in self._symbol

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SymbolTable):
            return NotImplemented
        return self._symbol == other._symbol

    def items(self) -> list[tuple[str, str]]:
        return list(self._symbol.items())

    def symbol(self, node_id: str) -> str:
        try:
            return self._symbol[node_id]
        except KeyError:
            raise UnknownNode(node_id) from None

    def node_id(self, symbol: str) -> str:
        try:
            return self._node[symbol.casefold()]
        except KeyError:
            raise UnknownSymbol(symbol) from None

    def is_taken(self, symbol: str) -> bool:
        return symbol.casefold() in self._node

    def _register(self, node_id: str, symbol: str) -> None:
        self._symbol[node_id] = symbol
        self._node[symbol.casefold()] = node_id

    @classmethod
    def for_utg(cls, utg: Utg) -> SymbolTable:
        table = cls()
        for node_id in utg.nodes:
            sanitize_identifier(node_id, table)
        return table


_ILLEGAL = re.compile(r"[^A-Za-z0-9_-]")


def _legal_name(raw: str) -> str:
    base = _ILLEGAL.sub("-", raw)
    if not base or base[0] not in string.ascii_letters:
        base = "n-" + base
    return base


def sanitize_identifier(node_id: str, table: SymbolTable) -> str:
    """Return the PDDL symbol for ``node_id``, registering it on first use."""
    if not node_id:
        raise ValueError("node id must be non-empty")
    if node_id in table:
        return table.symbol(node_id)
    base = _legal_name(node_id)
    candidate = base
    suffix = 2
    while table.is_taken(candidate):
        candidate = f"{base}-{suffix}"
        suffix += 1
    table._register(node_id, candidate)
    return candidate


# --- problems --------------------------------------------------------------


def ordered_edge_keys(utg: Utg) -> list[EdgeKey]:
    """Static edges in ingestion order, then dynamically added ones sorted."""
    static = [k for k, e in utg.edges.items() if e.origin is EdgeOrigin.STATIC]
    dynamic = sorted(k for k, e in utg.edges.items() if e.origin is EdgeOrigin.DYNAMIC)
    return static + dynamic


@dataclass(frozen=True)
class PddlProblem:
    problem_name: str
    objects: tuple[str, ...]
    init_at: str
    goal_node: str
    connected: tuple[tuple[str, str], ...]
    domain_name: str = DOMAIN_NAME

    def to_pddl(self) -> str:
        lines = [
            f"(define (problem {self.problem_name})",
            f"  (:domain {self.domain_name})",
            "",
            "  (:objects",
            *(f"    {obj} - node" for obj in self.objects),
            "  )",
            "",
            "  (:init",
            f"    (at {self.init_at})",
            "",
            f"    (goal-node {self.goal_node})",
        ]
        if self.connected:
            lines.append("")
            lines.extend(f"    (connected {a} {b})" for a, b in self.connected)
        lines += [
            "  )",
            "",
            "  (:goal",
            f"    (goal-achieved {self.goal_node})",
            "  )",
            ")",
        ]
        return "\n".join(lines) + "\n"


def build_problem(
    utg: Utg,
    init: str,
    target: str,
    problem_name: str = "navigate-task",
) -> tuple[PddlProblem, SymbolTable]:
    for node_id in (init, target):
        if node_id not in utg.nodes:
            raise UnknownNode(node_id)
    table = SymbolTable.for_utg(utg)
    problem = PddlProblem(
        problem_name=_legal_name(problem_name),
        objects=tuple(table.symbol(n) for n in utg.nodes),
        init_at=table.symbol(init),
        goal_node=table.symbol(target),
        connected=tuple((table.symbol(s), table.symbol(d)) for s, d in ordered_edge_keys(utg)),
    )
    return problem, table


def emit_problem(
    utg: Utg,
    init: str,
    target: str,
    problem_name: str = "navigate-task",
) -> tuple[str, SymbolTable]:
    problem, table = build_problem(utg, init, target, problem_name)
    return problem.to_pddl(), table


# --- plans -----------------------------------------------------------------


@dataclass(frozen=True)
class Plan:
    """A chained sequence of ``(from, to)`` navigation steps.

    ``cost`` is the step count under unit cost, or the summed action costs
    when a non-uniform cost model produced the plan.
    """

    steps: tuple[tuple[str, str], ...] = ()
    cost: float = None  # type: ignore[assignment]

    def __post_init__(self) -> None:
        steps = tuple((str(a), str(b)) for a, b in self.steps)
        object.__setattr__(self, "steps", steps)
        for i in range(1, len(steps)):
            if steps[i][0] != steps[i - 1][1]:
                raise ChainBroken(i)
        if self.cost is None:
            object.__setattr__(self, "cost", len(steps))
        if self.cost < 0:
            raise ValueError("plan cost must be non-negative")

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def nodes(self) -> list[str]:
        """Visited node sequence, including the start; empty for an empty plan."""
        if not self.steps:
            return []
        return [self.steps[0][0]] + [b for _, b in self.steps]

    @classmethod
    def from_nodes(cls, nodes: list[str], cost: float | None = None) -> Plan:
        steps = tuple(zip(nodes, nodes[1:]))
        return cls(steps, len(steps) if cost is None else cost)


def render_plan(plan: Plan, table: SymbolTable | None = None) -> str:
    """Textualize ``plan`` in planner output format."""

    def sym(node_id: str) -> str:
        return table.symbol(node_id) if table is not None else node_id

    lines = [f"(navigate {sym(a)} {sym(b)})" for a, b in plan.steps]
    lines.append(f"; cost = {len(plan.steps)} (unit cost)")
    return "\n".join(lines) + "\n"


_STEP_LINE = re.compile(r"^\(\s*navigate\s+([^\s()]+)\s+([^\s()]+)\s*\)$", re.IGNORECASE)
_COST_LINE = re.compile(r"^;\s*cost\s*=\s*(\d+)\s*\(unit cost\)\s*$")


def parse_plan(text: str, table: SymbolTable | None = None) -> Plan:
    """Parse planner output; symbols are mapped back to node ids via ``table``.

    Without a table the symbols are taken as node ids verbatim.
    """
    raw_steps: list[tuple[str, str]] = []
    declared: int | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith(";"):
            m = _COST_LINE.match(line)
            if m:
                declared = int(m.group(1))
            continue
        m = _STEP_LINE.match(line)
        if not m:
            raise MalformedPlanLine(lineno, raw)
        raw_steps.append((m.group(1), m.group(2)))

    if table is not None:
        steps = [(table.node_id(a), table.node_id(b)) for a, b in raw_steps]
    else:
        steps = raw_steps
    for i in range(1, len(steps)):
        if steps[i][0] != steps[i - 1][1]:
            raise ChainBroken(i)
    if declared is not None and declared != len(steps):
        raise CostMismatch(declared, len(steps))
    return Plan(tuple(steps), len(steps))


def utg_from_problem(text: str, app_name: str = "") -> tuple[Utg, str, str]:
    """Rebuild a graph from a problem file; returns ``(utg, init, target)``.

    Edge labels are placeholders (a click on a widget named after the
    destination) since problem files carry no widget data.
    """
    facts = read_problem(text)
    forms = read_sexprs(text)[0]
    order: list[str] = []
    for key, body in _sections(forms):  # type: ignore[arg-type]
        if key == ":objects":
            order = [t for i, t in enumerate(body) if isinstance(t, str) and t != "-" and (i == 0 or body[i - 1] != "-")]
    init_atoms = [a for a in facts.init if a[0] == "at"]
    goal_atoms = [a for a in facts.init if a[0] == "goal-node"]
    if len(init_atoms) != 1 or len(goal_atoms) != 1:
        raise SexprError("problem must contain exactly one (at ...) and one (goal-node ...)")
    connected = []
    for key, body in _sections(forms):  # type: ignore[arg-type]
        if key == ":init":
            connected = [tuple(a[1:]) for a in body if isinstance(a, list) and a and a[0] == "connected"]
    nodes = [UiNode(n, label_text=n) for n in order]
    edges = [TransitionEdge(s, d, click(f"to_{d}")) for s, d in connected]
    return build_utg(nodes, edges, app_name or facts.name), init_atoms[0][1], goal_atoms[0][1]
