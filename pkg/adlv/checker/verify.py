"""Query evaluation on networks: verdicts, traces and the per-kind checks."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from enum import Enum

from ..config import CheckConfig
from ..errors import AdlvError, BudgetExceeded, QueryError, RuleError
from ..expr import Expr, Name, Not
from ..queries import Query, QueryKind
from ..ta import Network
from ..transform import OBSERVER_NAME, attach_observer
from .liveness import find_lasso
from .search import Explorer, SearchResult
from .state import (
    CompiledNetwork,
    Step,
    SymbolicState,
    exists,
    forall,
    query_clock_constants,
)

logger = logging.getLogger(__name__)


class Status(str, Enum):
    SATISFIED = "Satisfied"
    VIOLATED = "Violated"
    UNKNOWN = "Unknown"


@dataclass(frozen=True, slots=True)
class Stats:
    states_explored: int
    wall_time: float


@dataclass(frozen=True, slots=True)
class TraceEntry:
    step: Step | None
    state: SymbolicState


@dataclass(frozen=True, slots=True)
class Trace:
    """States from the initial state on; ``loop_start`` marks a lasso's cycle entry."""

    entries: tuple[TraceEntry, ...]
    network: CompiledNetwork = field(compare=False, repr=False)
    loop_start: int | None = None

    def __len__(self) -> int:
        return len(self.entries)

    def action_text(self, position: int) -> str:
        step = self.entries[position].step
        if step is None:
            return "initial"
        automata = self.network.network.automata
        moves = ", ".join(
            f"{automata[m.automaton].name}: "
            f"{automata[m.automaton].locations[m.source].name}->"
            f"{automata[m.automaton].locations[m.target].name}"
            for m in step.moves
        )
        head = f"sync {step.channel}" if step.channel is not None else "internal"
        return f"{head} {{{moves}}}"

    def locations(self, position: int) -> dict[str, str]:
        state = self.entries[position].state
        return {
            ta.name: ta.locations[loc].name
            for ta, loc in zip(self.network.network.automata, state.locations, strict=True)
        }

    def changed_variables(self, position: int) -> dict[str, int]:
        state = self.entries[position].state
        names = self.network.var_names
        if position == 0:
            return dict(zip(names, state.discretes, strict=True))
        before = self.entries[position - 1].state.discretes
        return {
            name: value
            for name, value, old in zip(names, state.discretes, before, strict=True)
            if value != old
        }

    def zone_text(self, position: int) -> list[str]:
        return self.entries[position].state.zone.describe(self.network.clock_names)

    def render(self) -> str:
        lines: list[str] = []
        for position in range(len(self.entries)):
            marker = " (loop)" if position == self.loop_start else ""
            lines.append(f"{position}: {self.action_text(position)}{marker}")
            if position == 0:
                places = ", ".join(f"{k}.{v}" for k, v in self.locations(0).items())
                lines.append(f"   at {places}")
            changed = self.changed_variables(position)
            if changed:
                lines.append("   " + ", ".join(f"{k}={v}" for k, v in changed.items()))
            lines.append("   delay " + ", ".join(self.zone_text(position)))
        if self.loop_start is not None:
            lines.append(f"   ...repeats from step {self.loop_start}")
        return "\n".join(lines)


@dataclass(frozen=True, slots=True)
class Verdict:
    status: Status
    query: Query
    trace: Trace | None
    stats: Stats
    message: str | None = None

    @property
    def satisfied(self) -> bool:
        return self.status is Status.SATISFIED


def _trace(network: CompiledNetwork, result: SearchResult, index: int) -> Trace:
    return Trace(
        tuple(TraceEntry(node.step, node.state) for node in result.path(index)), network
    )


class Checker:
    """Runs queries against one network with a fixed configuration."""

    def __init__(self, network: Network, config: CheckConfig | None = None) -> None:
        self.config = config or CheckConfig()
        self.network = network
        self.compiled = CompiledNetwork(network, extrapolate=self.config.extrapolate)
        self._variants: dict[tuple[tuple[str, int], ...], CompiledNetwork] = {}

    def compiled_for(self, *exprs: Expr) -> CompiledNetwork:
        """The compiled network whose extrapolation keeps the clocks ``exprs`` compare."""

        constants = query_clock_constants(self.network, exprs)
        if not constants:
            return self.compiled
        key = tuple(sorted(constants.items()))
        compiled = self._variants.get(key)
        if compiled is None:
            compiled = CompiledNetwork(
                self.network, extrapolate=self.config.extrapolate, query_constants=constants
            )
            self._variants[key] = compiled
        return compiled

    def _finish(
        self,
        compiled: CompiledNetwork,
        query: Query,
        result: SearchResult,
        started: float,
        *,
        satisfied_on_hit: bool,
    ) -> Verdict:
        stats = Stats(result.states_explored, time.perf_counter() - started)
        if result.error is not None:
            assert result.hit is not None
            return Verdict(
                Status.VIOLATED,
                query,
                _trace(compiled, result, result.hit),
                stats,
                str(result.error),
            )
        if result.hit is None:
            status = Status.VIOLATED if satisfied_on_hit else Status.SATISFIED
            return Verdict(status, query, None, stats)
        status = Status.SATISFIED if satisfied_on_hit else Status.VIOLATED
        return Verdict(status, query, _trace(compiled, result, result.hit), stats)

    def check_invariant(self, expr: Expr, query: Query | None = None) -> Verdict:
        query = query or Query.invariant(expr)
        compiled = self.compiled_for(expr)
        formula = compiled.compile_formula(expr)
        started = time.perf_counter()
        result = Explorer(compiled, self.config).run(lambda state: not forall(formula, state))
        return self._finish(compiled, query, result, started, satisfied_on_hit=False)

    def check_reachability(self, expr: Expr, query: Query | None = None) -> Verdict:
        query = query or Query.reach(expr)
        compiled = self.compiled_for(expr)
        formula = compiled.compile_formula(expr)
        started = time.perf_counter()
        result = Explorer(compiled, self.config).run(lambda state: exists(formula, state))
        return self._finish(compiled, query, result, started, satisfied_on_hit=True)

    def check_deadlock_free(self, query: Query | None = None) -> Verdict:
        query = query or Query.deadlock_free()
        started = time.perf_counter()
        result = Explorer(self.compiled, self.config).run(stop_on_deadlock=True)
        return self._finish(self.compiled, query, result, started, satisfied_on_hit=False)

    def check_leads_to(self, premise: Expr, conclusion: Expr, query: Query | None = None) -> Verdict:
        """``premise --> conclusion``; the conclusion may only test locations and data."""

        query = query or Query.leads_to(premise, conclusion)
        if query_clock_constants(self.network, [conclusion]):
            raise QueryError(
                f"clock constraints are not supported in a leads-to conclusion: {query.to_text()}"
            )
        compiled = self.compiled_for(premise)
        p = compiled.compile_formula(premise)
        q = compiled.compile_formula(conclusion)
        started = time.perf_counter()
        result = Explorer(compiled, self.config).run(record_edges=True)
        if result.error is not None:
            return self._finish(compiled, query, result, started, satisfied_on_hit=False)
        lasso = find_lasso(compiled, result, p, q)
        stats = Stats(result.states_explored, time.perf_counter() - started)
        if lasso is None:
            return Verdict(Status.SATISFIED, query, None, stats)
        entries = tuple(
            TraceEntry(step, result.nodes[index].state)
            for index, step in zip(lasso.nodes, lasso.steps, strict=True)
        )
        trace = Trace(entries, compiled, lasso.loop_start)
        message = f"counterexample ends in a {lasso.kind.value}"
        return Verdict(Status.VIOLATED, query, trace, stats, message)

    def check(self, query: Query) -> Verdict:
        """Dispatch on the query kind.

        Exhausting the state budget, or a query the network cannot evaluate,
        yields ``Unknown`` with the reason as message.
        """

        started = time.perf_counter()
        try:
            return self._dispatch(query)
        except BudgetExceeded as exc:
            logger.warning("%s: %s", query.label or query.to_text(), exc)
            return Verdict(
                Status.UNKNOWN,
                query,
                None,
                Stats(exc.states_explored, time.perf_counter() - started),
                str(exc),
            )
        except (QueryError, RuleError) as exc:
            logger.warning("%s: %s", query.label or query.to_text(), exc)
            return Verdict(
                Status.UNKNOWN, query, None, Stats(0, time.perf_counter() - started), str(exc)
            )

    def _dispatch(self, query: Query) -> Verdict:
        match query.kind:
            case QueryKind.INVARIANT:
                assert query.expr is not None
                return self.check_invariant(query.expr, query)
            case QueryKind.REACH:
                assert query.expr is not None
                return self.check_reachability(query.expr, query)
            case QueryKind.DEADLOCK_FREE:
                return self.check_deadlock_free(query)
            case QueryKind.LEADS_TO:
                assert query.premise is not None and query.conclusion is not None
                return self.check_leads_to(query.premise, query.conclusion, query)
            case QueryKind.BOUNDED_RESPONSE:
                assert query.premise is not None and query.conclusion is not None
                return check_bounded_response(
                    self.network, query.premise, query.conclusion, query.bound, self.config, query
                )
        raise AdlvError(f"unsupported query kind {query.kind}")  # pragma: no cover - exhaustive


def check_invariant(net: Network, expr: Expr, config: CheckConfig | None = None) -> Verdict:
    """``A[] expr``: every reachable state satisfies ``expr`` for all clock values."""

    return Checker(net, config).check_invariant(expr)


def check_reachability(net: Network, expr: Expr, config: CheckConfig | None = None) -> Verdict:
    """``E<> expr``; a satisfied verdict carries a witness trace."""

    return Checker(net, config).check_reachability(expr)


def check_deadlock_free(net: Network, config: CheckConfig | None = None) -> Verdict:
    return Checker(net, config).check_deadlock_free()


def check_leads_to(
    net: Network, premise: Expr, conclusion: Expr, config: CheckConfig | None = None
) -> Verdict:
    return Checker(net, config).check_leads_to(premise, conclusion)


def check_bounded_response(
    net: Network,
    request: Expr,
    response: Expr,
    bound: int | None,
    config: CheckConfig | None = None,
    query: Query | None = None,
) -> Verdict:
    """Compose the response-time observer and check that its error location is unreachable.

    ``bound=None`` drops the error edge and checks ``Obs.Run --> Obs.Init`` instead.
    """

    query = query or Query.bounded_response(request, response, bound)
    composed = attach_observer(net, request, response, bound)
    checker = Checker(composed, config)
    if bound is None:
        verdict = checker.check_leads_to(
            Name((OBSERVER_NAME, "Run")), Name((OBSERVER_NAME, "Init")), query
        )
    else:
        verdict = checker.check_invariant(Not(Name((OBSERVER_NAME, "error"))), query)
    logger.debug("bounded response %s: %s", query.to_text(), verdict.status.value)
    return verdict


def run_queries(
    net: Network, queries: list[Query], config: CheckConfig | None = None
) -> list[Verdict]:
    """Check ``queries`` in order against one compiled network."""

    checker = Checker(net, config)
    return [checker.check(query) for query in queries]


__all__ = [
    "Checker",
    "Stats",
    "Status",
    "Trace",
    "TraceEntry",
    "Verdict",
    "check_bounded_response",
    "check_deadlock_free",
    "check_invariant",
    "check_leads_to",
    "check_reachability",
    "run_queries",
]
