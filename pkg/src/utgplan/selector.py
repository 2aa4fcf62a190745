"""Natural-language goal to target-node matching.

The selector embeds the goal and a textual rendering of every candidate node
with an :class:`EmbeddingProvider`, scores them by cosine similarity and
returns a ranked :class:`SelectionResult`.  :func:`lexical_embed` is the
built-in deterministic provider: a hashed bag of words.

Results serialize to the same JSON object an LLM-backed selector is asked to
return (``nodes`` / ``confidence`` / ``reasoning``), so either source can feed
the planner.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Protocol, Sequence

import numpy as np

from utgplan.errors import DimensionMismatch, EmptyUtg, MalformedSelection, UnknownNode, ZeroVector
from utgplan.utg import UiNode, Utg

LEXICAL_DIM = 256

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1
_TOKEN_SPLIT = re.compile(r"[^a-z0-9]+")


class EmbeddingProvider(Protocol):
    def embed(self, text: str) -> Sequence[float]: ...


def fnv1a_64(data: bytes) -> int:
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    return h


def tokenize(text: str) -> list[str]:
    return [tok for tok in _TOKEN_SPLIT.split(text.lower()) if tok]


@lru_cache(maxsize=65536)
def _bucket(token: str, dim: int) -> int:
    return fnv1a_64(token.encode("utf-8")) % dim


def lexical_embed(text: str, dim: int = LEXICAL_DIM) -> np.ndarray:
    """Bucket-count vector of the lowercased alphanumeric tokens of ``text``."""
    vec = np.zeros(dim, dtype=np.float64)
    for tok in tokenize(text):
        vec[_bucket(tok, dim)] += 1.0
    return vec


class CachingProvider:
    """Memoizes another provider's vectors by text."""

    def __init__(self, inner: EmbeddingProvider) -> None:
        self.inner = inner
        self._cache: dict[str, Sequence[float]] = {}

    def embed(self, text: str) -> Sequence[float]:
        vec = self._cache.get(text)
        if vec is None:
            vec = self._cache[text] = self.inner.embed(text)
        return vec


class LexicalEmbedding:
    """:class:`EmbeddingProvider` wrapper around :func:`lexical_embed`."""

    def __init__(self, dim: int = LEXICAL_DIM) -> None:
        self.dim = dim

    def embed(self, text: str) -> np.ndarray:
        return lexical_embed(text, self.dim)


def cosine_similarity(u: Sequence[float], v: Sequence[float]) -> float:
    a = np.asarray(u, dtype=np.float64)
    b = np.asarray(v, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatch(f"dimensions differ: {a.shape} vs {b.shape}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise ZeroVector("cosine similarity is undefined for a zero vector")
    return max(-1.0, min(1.0, float(np.dot(a, b)) / (na * nb)))


def node_text(node: UiNode) -> str:
    """Text representation of a node: id, label, then widget texts."""
    parts = [node.id, node.label_text]
    seen: set[str] = set()
    for action in node.actions:
        w = action.widget
        if w.id in seen:
            continue
        seen.add(w.id)
        parts.extend(p for p in (w.text, w.content_description) if p)
    return " ".join(p for p in parts if p)


@dataclass(frozen=True)
class SelectionRequest:
    goal_text: str
    candidate_node_ids: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        if not self.goal_text:
            raise ValueError("goal_text must be non-empty")


@dataclass(frozen=True)
class SelectionResult:
    """Ranked candidate targets.

    ``scores`` is ``None`` for results parsed from JSON, which carries ids only.
    """

    nodes: tuple[str, ...]
    confidence: float
    reasoning: str
    scores: tuple[float, ...] | None = None

    @property
    def ranked_nodes(self) -> list[tuple[str, float | None]]:
        scores: Sequence[float | None] = self.scores if self.scores is not None else [None] * len(self.nodes)
        return list(zip(self.nodes, scores))

    @property
    def top(self) -> str:
        if not self.nodes:
            raise EmptyUtg("selection is empty")
        return self.nodes[0]


def _norm(vec: Sequence[float]) -> tuple[np.ndarray, float]:
    arr = np.asarray(vec, dtype=np.float64)
    return arr, float(np.linalg.norm(arr))


def select_target(
    request: SelectionRequest,
    utg: Utg,
    provider: EmbeddingProvider | None = None,
) -> SelectionResult:
    if not utg.nodes:
        raise EmptyUtg("cannot select a target in an empty graph")
    provider = provider or LexicalEmbedding()
    if request.candidate_node_ids is None:
        candidates = list(utg.nodes)
    else:
        candidates = list(dict.fromkeys(request.candidate_node_ids))
        for node_id in candidates:
            if node_id not in utg.nodes:
                raise UnknownNode(node_id)
        if not candidates:
            raise EmptyUtg("candidate set is empty")

    goal, goal_norm = _norm(provider.embed(request.goal_text))
    scored = []
    for node_id in candidates:
        vec, vec_norm = _norm(provider.embed(node_text(utg.nodes[node_id])))
        if vec.shape != goal.shape:
            raise DimensionMismatch(f"provider returned {vec.shape} for node {node_id!r}, {goal.shape} for goal")
        if goal_norm == 0.0 or vec_norm == 0.0:
            score = 0.0
        else:
            cos = float(np.dot(goal, vec)) / (goal_norm * vec_norm)
            score = min(1.0, max(0.0, (cos + 1.0) / 2.0))
        scored.append((node_id, score))
    scored.sort(key=lambda item: (-item[1], item[0]))

    top_id, top_score = scored[0]
    reasoning = f"embedding match: {top_id} is closest to the goal (score {top_score:.4f})"
    return SelectionResult(
        nodes=tuple(n for n, _ in scored),
        confidence=top_score,
        reasoning=reasoning,
        scores=tuple(s for _, s in scored),
    )


_SELECTION_KEYS = ("nodes", "confidence", "reasoning")


def format_selection_json(result: SelectionResult) -> str:
    return json.dumps(
        {
            "nodes": list(result.nodes),
            "confidence": round(result.confidence, 6),
            "reasoning": result.reasoning,
        },
        separators=(",", ":"),
        ensure_ascii=False,
    )


def parse_selection_json(text: str) -> SelectionResult:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedSelection("$", f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise MalformedSelection("$", "expected a JSON object")
    for key in _SELECTION_KEYS:
        if key not in doc:
            raise MalformedSelection(key, "missing")
    for key in doc:
        if key not in _SELECTION_KEYS:
            raise MalformedSelection(key, "unexpected key")

    nodes = doc["nodes"]
    if not isinstance(nodes, list) or not all(isinstance(n, str) for n in nodes):
        raise MalformedSelection("nodes", "expected a list of strings")
    confidence = doc["confidence"]
    if isinstance(confidence, bool) or not isinstance(confidence, (int, float)):
        raise MalformedSelection("confidence", "expected a number")
    if not (0.0 <= confidence <= 1.0) or math.isnan(confidence):
        raise MalformedSelection("confidence", "must lie in [0, 1]")
    reasoning = doc["reasoning"]
    if not isinstance(reasoning, str):
        raise MalformedSelection("reasoning", "expected a string")
    return SelectionResult(tuple(nodes), float(confidence), reasoning)
