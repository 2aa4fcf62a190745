"""Optimal UI navigation plans from UI transition graphs via classical planning."""

from utgplan.kernels import BACKEND
from utgplan.utg import (
    Action,
    DeltaKind,
    EdgeOrigin,
    Neighbor,
    TransitionEdge,
    UiNode,
    UserEvent,
    Utg,
    UtgDelta,
    Widget,
    build_utg,
    click,
    k_hop_neighbors,
    load_utg,
    observe_transition,
    save_utg,
    utg_stats,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Action",
    "DeltaKind",
    "EdgeOrigin",
    "Neighbor",
    "TransitionEdge",
    "UiNode",
    "UserEvent",
    "Utg",
    "UtgDelta",
    "Widget",
    "build_utg",
    "click",
    "k_hop_neighbors",
    "load_utg",
    "observe_transition",
    "save_utg",
    "utg_stats",
]
