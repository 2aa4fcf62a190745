"""Exception hierarchy shared across the package."""

from __future__ import annotations


class UtgPlanError(Exception):
    """Base class for every error raised by utgplan."""


# --- graph model -----------------------------------------------------------


class DuplicateNode(UtgPlanError):
    def __init__(self, node_id: str) -> None:
        super().__init__(f"duplicate node id: {node_id!r}")
        self.node_id = node_id


class DanglingEdge(UtgPlanError):
    def __init__(self, node_id: str) -> None:
        super().__init__(f"edge endpoint names unknown node: {node_id!r}")
        self.node_id = node_id


class DuplicateEdgeKey(UtgPlanError):
    def __init__(self, src: str, dst: str) -> None:
        super().__init__(f"duplicate edge key: ({src!r}, {dst!r})")
        self.key = (src, dst)


class UnknownSourceNode(UtgPlanError):
    def __init__(self, node_id: str) -> None:
        super().__init__(f"unknown source node: {node_id!r}")
        self.node_id = node_id


class UnknownNode(UtgPlanError):
    def __init__(self, node_id: str) -> None:
        super().__init__(f"unknown node: {node_id!r}")
        self.node_id = node_id


class SchemaViolation(UtgPlanError):
    def __init__(self, path: str, message: str = "") -> None:
        text = f"schema violation at {path!r}"
        if message:
            text += f": {message}"
        super().__init__(text)
        self.path = path


# --- node selection --------------------------------------------------------


class DimensionMismatch(UtgPlanError, ValueError):
    pass


class ZeroVector(UtgPlanError, ValueError):
    pass


class EmptyUtg(UtgPlanError):
    pass


class MalformedSelection(UtgPlanError):
    def __init__(self, key: str, message: str = "") -> None:
        super().__init__(f"malformed selection field {key!r}" + (f": {message}" if message else ""))
        self.key = key


# --- PDDL / plans ----------------------------------------------------------


class PlanParseError(UtgPlanError):
    pass


class MalformedPlanLine(PlanParseError):
    def __init__(self, line_number: int, line: str) -> None:
        super().__init__(f"line {line_number}: cannot parse {line!r}")
        self.line_number = line_number
        self.line = line


class ChainBroken(PlanParseError):
    def __init__(self, step_index: int) -> None:
        super().__init__(f"step {step_index} does not start where step {step_index - 1} ended")
        self.step_index = step_index


class CostMismatch(PlanParseError):
    def __init__(self, declared: int, steps: int) -> None:
        super().__init__(f"declared cost {declared} but plan has {steps} steps")
        self.declared = declared
        self.steps = steps


class UnknownSymbol(PlanParseError):
    def __init__(self, symbol: str) -> None:
        super().__init__(f"symbol not in table: {symbol!r}")
        self.symbol = symbol


class SexprError(UtgPlanError):
    pass


# --- planner ---------------------------------------------------------------


class PlannerTimeout(UtgPlanError):
    pass


class PlannerCrash(UtgPlanError):
    def __init__(self, returncode: int, stderr: str) -> None:
        super().__init__(f"planner exited with status {returncode}: {stderr[:500]}")
        self.returncode = returncode
        self.stderr = stderr


class InvalidExternalPlan(UtgPlanError):
    def __init__(self, report: object) -> None:
        super().__init__(f"external planner produced an invalid plan: {report}")
        self.report = report


class PlanMismatch(UtgPlanError):
    pass


# --- simulation / statistics -----------------------------------------------


class ConfigError(UtgPlanError, ValueError):
    pass


class AllZeroDifferences(UtgPlanError, ValueError):
    pass
