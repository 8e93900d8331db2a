"""Structured findings produced by the model and network validators."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class Severity(str, Enum):
    ERROR = "error"
    WARNING = "warning"
    INFO = "info"


class Rule(str, Enum):
    """Rule identifiers, one per structural invariant."""

    # adl-core
    DUPLICATE_FUNCTION = "DUPLICATE-FUNCTION"
    DUPLICATE_PORT = "DUPLICATE-PORT"
    DUPLICATE_VARIABLE = "DUPLICATE-VARIABLE"
    UNKNOWN_FUNCTION = "UNKNOWN-FUNCTION"
    UNKNOWN_PORT = "UNKNOWN-PORT"
    CONNECTOR_DIRECTION = "CONNECTOR-DIRECTION"
    CONNECTOR_TYPE = "CONNECTOR-TYPE"
    TRIGGER_DIRECTION = "TRIGGER-DIRECTION"
    EMPTY_RANGE = "EMPTY-RANGE"
    INITIAL_OUT_OF_RANGE = "INITIAL-OUT-OF-RANGE"
    TIME_PERIOD = "TIME-PERIOD"
    EVENT_PERIOD = "EVENT-PERIOD"
    NEGATIVE_EXEC = "NEGATIVE-EXEC"
    UNRESOLVED_NAME = "UNRESOLVED-NAME"
    UNKNOWN_STATE = "UNKNOWN-STATE"
    INITIAL_STATE = "INITIAL-STATE"
    ENV_TARGET = "ENV-TARGET"
    CSPORT_REDUCED = "CSPORT-REDUCED"
    FAN_IN = "FAN-IN"
    TRIGGER_FAN_IN = "TRIGGER-FAN-IN"
    # ta-core
    BAD_INITIAL = "BAD-INITIAL"
    BAD_EDGE_ENDPOINT = "BAD-EDGE-ENDPOINT"
    INVARIANT_NOT_UPPER = "INVARIANT-NOT-UPPER"
    UNDECLARED_CHANNEL = "UNDECLARED-CHANNEL"
    DUPLICATE_CLOCK = "DUPLICATE-CLOCK"
    SHADOWED_GLOBAL = "SHADOWED-GLOBAL"
    DUPLICATE_LOCATION = "DUPLICATE-LOCATION"
    DUPLICATE_AUTOMATON = "DUPLICATE-AUTOMATON"
    BAD_RESET = "BAD-RESET"
    UNKNOWN_VARIABLE = "UNKNOWN-VARIABLE"
    CLOCK_GUARD_FORM = "CLOCK-GUARD-FORM"
    RECEIVER_CLOCK_GUARD = "RECEIVER-CLOCK-GUARD"


@dataclass(frozen=True, slots=True)
class Diagnostic:
    """One validation finding anchored at a named model element."""

    rule: Rule
    location: str
    message: str
    severity: Severity = Severity.ERROR

    def __str__(self) -> str:
        return f"[{self.severity.value}] {self.rule.value} at {self.location}: {self.message}"


def errors_only(diagnostics: list[Diagnostic]) -> list[Diagnostic]:
    """Return the diagnostics that block transformation."""

    return [diag for diag in diagnostics if diag.severity is Severity.ERROR]


__all__ = ["Diagnostic", "Rule", "Severity", "errors_only"]
