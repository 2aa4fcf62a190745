"""UI transition graph model, JSON persistence and observation-driven refinement.

A :class:`Utg` is an immutable directed graph whose nodes are UI screens and
whose edges carry the :class:`Action` that triggers the transition.  At most
one edge exists per ordered ``(src, dst)`` pair, so the edge label is a
function of the pair.  :func:`observe_transition` returns a new graph together
with a :class:`UtgDelta` describing which of the refinement rules fired.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from types import MappingProxyType
from typing import Any, Iterable, Mapping, NamedTuple

from utgplan.errors import (
    DanglingEdge,
    DuplicateEdgeKey,
    DuplicateNode,
    SchemaViolation,
    UnknownSourceNode,
)
from utgplan.graph import CompiledGraph

KNOWN_EVENT_KINDS = ("click", "long_click", "input", "scroll", "back")

EdgeKey = tuple[str, str]


@dataclass(frozen=True)
class Widget:
    """An interactive element on a screen.

    ``api_call`` optionally carries the framework call recorded by static
    analysis for the transition; it is only used when rendering guides.
    """

    id: str
    widget_class: str = "Widget"
    content_description: str | None = None
    text: str | None = None
    api_call: str | None = None

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("widget id must be non-empty")


@dataclass(frozen=True)
class UserEvent:
    kind: str
    payload: str | None = None

    def __post_init__(self) -> None:
        if not self.kind:
            raise ValueError("event kind must be non-empty")
        if (self.kind == "input") != (self.payload is not None):
            raise ValueError("payload is required for input events and forbidden otherwise")

    @property
    def is_custom(self) -> bool:
        return self.kind not in KNOWN_EVENT_KINDS


@dataclass(frozen=True, eq=False)
class Action:
    """A ``(widget, event)`` pair.

    Equality and hashing only look at ``widget.id`` and the event, so two
    observations of the same button with different metadata compare equal.
    """

    widget: Widget
    event: UserEvent = field(default_factory=lambda: UserEvent("click"))

    @property
    def key(self) -> tuple[str, UserEvent]:
        return (self.widget.id, self.event)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Action):
            return NotImplemented
        return self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __str__(self) -> str:
        if self.event.payload is not None:
            return f"{self.event.kind}({self.widget.id}, {self.event.payload!r})"
        return f"{self.event.kind}({self.widget.id})"


def click(widget_id: str, widget_class: str = "Widget", **widget_fields: Any) -> Action:
    return Action(Widget(widget_id, widget_class, **widget_fields), UserEvent("click"))


@dataclass(frozen=True)
class UiNode:
    id: str
    actions: tuple[Action, ...] = ()
    label_text: str = ""

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("node id must be non-empty")
        actions = tuple(self.actions)
        object.__setattr__(self, "actions", actions)
        if len(set(actions)) != len(actions):
            raise ValueError(f"node {self.id!r} lists the same (widget, event) pair twice")

    def has_action(self, action: Action) -> bool:
        return action in self.actions

    def with_action(self, action: Action) -> UiNode:
        if action in self.actions:
            return self
        return replace(self, actions=self.actions + (action,))


class EdgeOrigin(str, Enum):
    STATIC = "static"
    DYNAMIC = "dynamic"


@dataclass(frozen=True)
class TransitionEdge:
    src: str
    dst: str
    label: Action
    origin: EdgeOrigin = EdgeOrigin.STATIC

    @property
    def key(self) -> EdgeKey:
        return (self.src, self.dst)


class DeltaKind(str, Enum):
    UPDATED_EDGE = "UpdatedEdge"
    ADDED_EDGE = "AddedEdge"
    ADDED_NODE = "AddedNode"
    NO_CHANGE = "NoChange"


@dataclass(frozen=True)
class UtgDelta:
    kind: DeltaKind
    edge: EdgeKey
    old_label: Action | None = None


@dataclass(frozen=True)
class Utg:
    """Immutable UI transition graph.

    Use :func:`build_utg` or :func:`load_utg` rather than the constructor; they
    validate the graph invariants.
    """

    nodes: Mapping[str, UiNode]
    edges: Mapping[EdgeKey, TransitionEdge]
    app_name: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "nodes", MappingProxyType(dict(self.nodes)))
        object.__setattr__(self, "edges", MappingProxyType(dict(self.edges)))

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @cached_property
    def _out_edges(self) -> dict[str, tuple[TransitionEdge, ...]]:
        out: dict[str, list[TransitionEdge]] = {n: [] for n in self.nodes}
        for edge in self.edges.values():
            out[edge.src].append(edge)
        return {n: tuple(sorted(es, key=lambda e: e.dst)) for n, es in out.items()}

    @cached_property
    def compiled(self) -> CompiledGraph:
        return CompiledGraph.from_utg(self)

    def out_edges(self, node_id: str) -> tuple[TransitionEdge, ...]:
        """Outgoing edges of ``node_id`` sorted by destination id."""
        try:
            return self._out_edges[node_id]
        except KeyError:
            raise UnknownSourceNode(node_id) from None

    def without_edges(self, keys: Iterable[EdgeKey]) -> Utg:
        drop = set(keys)
        if not drop & self.edges.keys():
            return self
        return Utg(self.nodes, {k: e for k, e in self.edges.items() if k not in drop}, self.app_name)


def build_utg(
    nodes: Iterable[UiNode],
    edges: Iterable[TransitionEdge],
    app_name: str = "",
) -> Utg:
    """Validate and assemble a graph.

    Edge labels whose widget is missing from the source node's action list are
    appended to that list.
    """
    node_map: dict[str, UiNode] = {}
    for node in nodes:
        if node.id in node_map:
            raise DuplicateNode(node.id)
        node_map[node.id] = node

    edge_map: dict[EdgeKey, TransitionEdge] = {}
    for edge in edges:
        for endpoint in (edge.src, edge.dst):
            if endpoint not in node_map:
                raise DanglingEdge(endpoint)
        if edge.key in edge_map:
            raise DuplicateEdgeKey(edge.src, edge.dst)
        edge_map[edge.key] = edge
        node_map[edge.src] = node_map[edge.src].with_action(edge.label)

    return Utg(node_map, edge_map, app_name)


def observe_transition(
    utg: Utg,
    src: str,
    a_obs: Action,
    dst_ui: str | UiNode,
) -> tuple[Utg, UtgDelta]:
    """Fold one observed transition ``src --a_obs--> dst_ui`` into the graph.

    ``dst_ui`` matches an existing node when its id is already present;
    otherwise it becomes a new node.
    """
    if src not in utg.nodes:
        raise UnknownSourceNode(src)
    if isinstance(dst_ui, UiNode):
        dst_id, dst_node = dst_ui.id, dst_ui
    else:
        dst_id, dst_node = dst_ui, UiNode(dst_ui)
    key = (src, dst_id)

    existing = utg.edges.get(key)
    if existing is not None and existing.label == a_obs:
        return utg, UtgDelta(DeltaKind.NO_CHANGE, key)

    nodes = dict(utg.nodes)
    edges = dict(utg.edges)
    if existing is not None:
        delta = UtgDelta(DeltaKind.UPDATED_EDGE, key, old_label=existing.label)
        edges[key] = replace(existing, label=a_obs)
    else:
        if dst_id in nodes:
            delta = UtgDelta(DeltaKind.ADDED_EDGE, key)
        else:
            delta = UtgDelta(DeltaKind.ADDED_NODE, key)
            nodes[dst_id] = dst_node
        edges[key] = TransitionEdge(src, dst_id, a_obs, EdgeOrigin.DYNAMIC)
    nodes[src] = nodes[src].with_action(a_obs)
    return Utg(nodes, edges, utg.app_name), delta


class Neighbor(NamedTuple):
    node_id: str
    first_action: Action
    hops: int


def k_hop_neighbors(utg: Utg, center: str, k: int) -> list[Neighbor]:
    """Nodes reachable from ``center`` within ``k`` directed edges.

    Each entry carries the action on the first edge of a breadth-first path
    (parents are chosen by smallest id) and its hop distance.  The result is
    sorted by ``(hops, node_id)`` and excludes ``center``.
    """
    if center not in utg.nodes:
        raise UnknownSourceNode(center)
    if k < 1:
        raise ValueError("k must be >= 1")

    graph = utg.compiled
    dist, parent = graph.bfs(graph.index[center], max_depth=k)
    c = graph.index[center]
    result = []
    for v, d in enumerate(dist):
        if d <= 0:
            continue
        hop1 = v
        while parent[hop1] != c:
            hop1 = parent[hop1]
        first = utg.edges[(center, graph.ids[hop1])].label
        result.append(Neighbor(graph.ids[v], first, d))
    result.sort(key=lambda nb: (nb.hops, nb.node_id))
    return result


def utg_stats(utg: Utg) -> tuple[int, int]:
    return utg.node_count, utg.edge_count


# --- JSON persistence --------------------------------------------------------


def _widget_to_json(w: Widget) -> dict[str, Any]:
    out: dict[str, Any] = {"id": w.id, "class": w.widget_class}
    if w.content_description is not None:
        out["content_description"] = w.content_description
    if w.text is not None:
        out["text"] = w.text
    if w.api_call is not None:
        out["api_call"] = w.api_call
    return out


def action_to_json(a: Action) -> dict[str, Any]:
    event: dict[str, Any] = {"kind": a.event.kind}
    if a.event.payload is not None:
        event["payload"] = a.event.payload
    return {"widget": _widget_to_json(a.widget), "event": event}


def utg_to_json(utg: Utg) -> dict[str, Any]:
    return {
        "app": utg.app_name,
        "nodes": [
            {
                "id": n.id,
                "label_text": n.label_text,
                "actions": [action_to_json(a) for a in n.actions],
            }
            for n in utg.nodes.values()
        ],
        "edges": [
            {
                "src": e.src,
                "dst": e.dst,
                "action": action_to_json(e.label),
                "origin": e.origin.value,
            }
            for e in utg.edges.values()
        ],
    }


def save_utg(utg: Utg) -> str:
    return json.dumps(utg_to_json(utg), indent=2, ensure_ascii=False) + "\n"


def _check_object(
    value: Any,
    path: str,
    required: tuple[str, ...],
    optional: tuple[str, ...] = (),
) -> dict[str, Any]:
    if not isinstance(value, dict):
        raise SchemaViolation(path or "$", "expected an object")
    prefix = f"{path}." if path else ""
    for name in required:
        if name not in value:
            raise SchemaViolation(prefix + name, "missing required field")
    for name in value:
        if name not in required and name not in optional:
            raise SchemaViolation(prefix + name, "unknown field")
    return value


def _check_str(value: Any, path: str, optional: bool = False) -> str | None:
    if value is None and optional:
        return None
    if not isinstance(value, str):
        raise SchemaViolation(path, "expected a string")
    return value


def _check_list(value: Any, path: str) -> list[Any]:
    if not isinstance(value, list):
        raise SchemaViolation(path, "expected an array")
    return value


def action_from_json(value: Any, path: str) -> Action:
    obj = _check_object(value, path, ("widget", "event"))
    wpath = f"{path}.widget"
    w = _check_object(
        obj["widget"], wpath, ("id", "class"), ("content_description", "text", "api_call")
    )
    epath = f"{path}.event"
    e = _check_object(obj["event"], epath, ("kind",), ("payload",))
    try:
        widget = Widget(
            id=_check_str(w["id"], f"{wpath}.id"),
            widget_class=_check_str(w["class"], f"{wpath}.class"),
            content_description=_check_str(
                w.get("content_description"), f"{wpath}.content_description", True
            ),
            text=_check_str(w.get("text"), f"{wpath}.text", True),
            api_call=_check_str(w.get("api_call"), f"{wpath}.api_call", True),
        )
    except ValueError as exc:
        raise SchemaViolation(f"{wpath}.id", str(exc)) from None
    try:
        event = UserEvent(
            _check_str(e["kind"], f"{epath}.kind"),
            _check_str(e.get("payload"), f"{epath}.payload", True),
        )
    except ValueError as exc:
        raise SchemaViolation(epath, str(exc)) from None
    return Action(widget, event)


def utg_from_json(doc: Any) -> Utg:
    root = _check_object(doc, "", ("app", "nodes", "edges"))
    app = _check_str(root["app"], "app")
    nodes = []
    for i, raw in enumerate(_check_list(root["nodes"], "nodes")):
        path = f"nodes[{i}]"
        obj = _check_object(raw, path, ("id", "label_text", "actions"))
        node_id = _check_str(obj["id"], f"{path}.id")
        if not node_id:
            raise SchemaViolation(f"{path}.id", "must be non-empty")
        actions = tuple(
            action_from_json(a, f"{path}.actions[{j}]")
            for j, a in enumerate(_check_list(obj["actions"], f"{path}.actions"))
        )
        try:
            nodes.append(UiNode(node_id, actions, _check_str(obj["label_text"], f"{path}.label_text")))
        except ValueError as exc:
            raise SchemaViolation(f"{path}.actions", str(exc)) from None
    edges = []
    for i, raw in enumerate(_check_list(root["edges"], "edges")):
        path = f"edges[{i}]"
        obj = _check_object(raw, path, ("src", "dst", "action"), ("origin",))
        origin_text = obj.get("origin", "static")
        try:
            origin = EdgeOrigin(origin_text)
        except ValueError:
            raise SchemaViolation(f"{path}.origin", "expected 'static' or 'dynamic'") from None
        edges.append(
            TransitionEdge(
                _check_str(obj["src"], f"{path}.src"),
                _check_str(obj["dst"], f"{path}.dst"),
                action_from_json(obj["action"], f"{path}.action"),
                origin,
            )
        )
    return build_utg(nodes, edges, app)


def load_utg(text: str) -> Utg:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaViolation("$", f"invalid JSON: {exc}") from None
    return utg_from_json(doc)
