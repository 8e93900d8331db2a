"""Exception hierarchy shared by the adlv library."""

from __future__ import annotations

from dataclasses import dataclass


class AdlvError(RuntimeError):
    """Base class for every error raised by the toolkit."""


@dataclass(frozen=True, slots=True)
class SourceSpan:
    """Position of a parsed node or error in its source text."""

    file: str
    line: int
    column: int

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


class ParseError(AdlvError):
    """Raised on the first syntax error of a model or query text."""

    def __init__(self, span: SourceSpan, expected: list[str], found: str) -> None:
        self.span = span
        self.expected = expected
        self.found = found
        wanted = ", ".join(expected) if expected else "end of input"
        super().__init__(f"{span}: expected {wanted}, found {found!r}")


class AnnexError(AdlvError):
    """Raised when a behavior annex cannot be compiled."""


class RuleError(AdlvError):
    """Raised when a trigger rule's timing parameters are inconsistent."""


class RefineError(AdlvError):
    """Raised when per-state budgets do not add up to the execution time."""


class TransformError(AdlvError):
    """Wraps a rule failure with the name of the offending function."""

    def __init__(self, function: str, cause: AdlvError) -> None:
        self.function = function
        self.cause = cause
        super().__init__(f"function {function}: {cause}")


class EmptyInitial(AdlvError):
    """Raised when the initial invariants cannot hold at time zero."""


class BudgetExceeded(AdlvError):
    """Raised when exploration stores more states than the configured cap."""

    def __init__(self, states_explored: int) -> None:
        self.states_explored = states_explored
        super().__init__(f"state budget exhausted after {states_explored} stored states")


class RangeError(AdlvError):
    """Raised when an update drives a variable outside its declared range."""

    def __init__(self, variable: str, value: int, lo: int, hi: int) -> None:
        self.variable = variable
        self.value = value
        self.lo = lo
        self.hi = hi
        super().__init__(f"{variable} := {value} leaves range [{lo}..{hi}]")


class ExportError(AdlvError):
    """Raised when a network cannot be written in the UPPAAL dialect."""


class ConfigError(AdlvError):
    """Raised for unusable configuration values."""


class QueryError(AdlvError):
    """Raised when a query uses a name or form the network cannot evaluate."""


__all__ = [
    "AdlvError",
    "AnnexError",
    "BudgetExceeded",
    "ConfigError",
    "EmptyInitial",
    "ExportError",
    "ParseError",
    "QueryError",
    "RangeError",
    "RefineError",
    "RuleError",
    "SourceSpan",
    "TransformError",
]
