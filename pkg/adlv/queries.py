"""Property kinds understood by the checker and the query file parser."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .errors import SourceSpan
from .expr import Expr, to_dsl


class QueryKind(str, Enum):
    INVARIANT = "invariant"
    REACH = "reachability"
    LEADS_TO = "leads-to"
    BOUNDED_RESPONSE = "bounded-response"
    DEADLOCK_FREE = "deadlock-free"


@dataclass(frozen=True, slots=True)
class Query:
    """One property. ``expr`` is used by A[]/E<>, ``premise``/``conclusion`` by the rest.

    A bounded response with ``bound=None`` is the unbounded variant.
    """

    kind: QueryKind
    expr: Expr | None = None
    premise: Expr | None = None
    conclusion: Expr | None = None
    bound: int | None = None
    label: str | None = field(default=None, compare=False)
    span: SourceSpan | None = field(default=None, compare=False)

    @classmethod
    def invariant(cls, expr: Expr, label: str | None = None) -> Query:
        return cls(QueryKind.INVARIANT, expr=expr, label=label)

    @classmethod
    def reach(cls, expr: Expr, label: str | None = None) -> Query:
        return cls(QueryKind.REACH, expr=expr, label=label)

    @classmethod
    def leads_to(cls, premise: Expr, conclusion: Expr, label: str | None = None) -> Query:
        return cls(QueryKind.LEADS_TO, premise=premise, conclusion=conclusion, label=label)

    @classmethod
    def bounded_response(
        cls, request: Expr, response: Expr, bound: int | None, label: str | None = None
    ) -> Query:
        return cls(
            QueryKind.BOUNDED_RESPONSE,
            premise=request,
            conclusion=response,
            bound=bound,
            label=label,
        )

    @classmethod
    def deadlock_free(cls, label: str | None = None) -> Query:
        return cls(QueryKind.DEADLOCK_FREE, label=label)

    def with_label(self, label: str | None) -> Query:
        return Query(
            self.kind, self.expr, self.premise, self.conclusion, self.bound, label, self.span
        )

    def to_text(self) -> str:
        """Render the query in the query-file syntax."""

        match self.kind:
            case QueryKind.INVARIANT:
                assert self.expr is not None
                return f"A[] {to_dsl(self.expr)}"
            case QueryKind.REACH:
                assert self.expr is not None
                return f"E<> {to_dsl(self.expr)}"
            case QueryKind.LEADS_TO:
                assert self.premise is not None and self.conclusion is not None
                return f"{to_dsl(self.premise)} --> {to_dsl(self.conclusion)}"
            case QueryKind.BOUNDED_RESPONSE:
                assert self.premise is not None and self.conclusion is not None
                bound = "inf" if self.bound is None else str(self.bound)
                return (
                    f"response {to_dsl(self.premise)} => {to_dsl(self.conclusion)} within {bound}"
                )
            case QueryKind.DEADLOCK_FREE:
                return "A[] not deadlock"
        raise ValueError(self.kind)  # pragma: no cover - exhaustive match

    def __str__(self) -> str:
        return self.to_text()


__all__ = ["Query", "QueryKind"]
