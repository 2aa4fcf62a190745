"""Plain-text navigation guides for agents.

:func:`render_guide` turns a plan into step-by-step instructions with the
concrete next action spelled out; :func:`render_fallback` lists the nearby
destinations when no plan exists.  Section markers are fixed strings so that
prompts built around the guide can splice it deterministically.
"""

from __future__ import annotations

from utgplan.errors import PlanMismatch, UnknownSourceNode
from utgplan.pddl import Plan
from utgplan.selector import SelectionResult
from utgplan.utg import Action, Utg, k_hop_neighbors

GUIDE_HEADER = "--- UTG Navigation Guide ---"
GUIDE_FOOTER = "--- End Navigation Guide ---"
PLAN_HEADER = "--- NAVIGATION PLAN FOR YOUR GOAL ---"
FALLBACK_HEADER = "--- ALL AVAILABLE NAVIGATION OPTIONS FROM HERE ---"

USAGE_TIPS = (
    "This path was computed using PDDL planning for guaranteed optimality\n"
    "--- USAGE TIPS ---\n"
    "• If a NAVIGATION PLAN is shown above, follow it step by step for optimal path\n"
    "• The plan was computed using formal PDDL planning algorithms\n"
    "• If no plan exists, the target is unreachable from current location\n"
    "• Some UI elements may not be visible - scroll if needed"
)


def describe_action(action: Action) -> str:
    w = action.widget
    text = f"on {action.event.kind} the {w.widget_class} widget"
    if w.content_description:
        text += f' with content-description "{w.content_description}"'
    elif w.text:
        text += f' with text "{w.text}"'
    else:
        text += f' with id "{w.id}"'
    if action.event.payload is not None:
        text += f' entering "{action.event.payload}"'
    if w.api_call:
        text += f' via API call "{w.api_call}"'
    return text


def render_guide(
    plan: Plan,
    utg: Utg,
    current: str,
    selection: SelectionResult,
    max_targets: int = 1,
) -> str:
    if current not in utg.nodes:
        raise UnknownSourceNode(current)
    if plan.steps and plan.steps[0][0] != current:
        raise PlanMismatch(f"plan starts at {plan.steps[0][0]!r}, agent is at {current!r}")

    lines = [
        GUIDE_HEADER,
        f"Current UI: {current}",
        "",
        PLAN_HEADER,
        "Goal Analysis: Based on your goal, the system identified these target destinations:",
    ]
    targets = [n for n in selection.nodes if n in utg.nodes][:max_targets]
    lines.extend(f"  • {node_id}" for node_id in targets)
    lines += [f"Confidence: {selection.confidence:.0%}", "", "OPTIMAL PATH (Follow these steps in order):"]
    lines.extend(
        f"Step {i}: Navigate from {src} to {dst}" for i, (src, dst) in enumerate(plan.steps, start=1)
    )
    if plan.steps:
        first_src, first_dst = plan.steps[0]
        action = utg.edges[(first_src, first_dst)].label
        lines += [
            "IMMEDIATE NEXT ACTION:",
            f"  → {describe_action(action)}",
            f"  This will take you to: {first_dst}",
        ]
    lines += [f"Total steps in optimal path: {len(plan.steps)}", "", USAGE_TIPS, GUIDE_FOOTER]
    return "\n".join(lines) + "\n"


def render_fallback(utg: Utg, current: str, k: int = 1) -> str:
    neighbors = k_hop_neighbors(utg, current, k)
    lines = [GUIDE_HEADER, f"Current UI: {current}", "", FALLBACK_HEADER]
    hops = None
    for nb in neighbors:
        if k > 1 and nb.hops != hops:
            hops = nb.hops
            lines.append(f"{hops} step{'s' if hops > 1 else ''} away:")
        lines.append(f"• TO REACH: {nb.node_id}")
        prefix = "first " if nb.hops > 1 else ""
        lines.append(f"  → {prefix}{describe_action(nb.first_action)}")
    lines.append(GUIDE_FOOTER)
    return "\n".join(lines) + "\n"
