"""Zone-graph model checker for timed automata networks."""

from __future__ import annotations

from ..expr import Expr
from ..ta import Network
from .state import CompiledNetwork, Move, Step, SymbolicState
from .state import eval_expr as _eval_compiled
from .verify import (
    Checker,
    Stats,
    Status,
    Trace,
    TraceEntry,
    Verdict,
    check_bounded_response,
    check_deadlock_free,
    check_invariant,
    check_leads_to,
    check_reachability,
    run_queries,
)


def initial_state(net: Network) -> SymbolicState:
    return CompiledNetwork(net).initial_state()


def successors(net: Network, state: SymbolicState) -> list[tuple[Step, SymbolicState]]:
    return CompiledNetwork(net).successors(state)


def eval_expr(net: Network, state: SymbolicState, expr: Expr, *, universal: bool = True) -> bool:
    """Evaluate ``expr`` in ``state``; clock atoms use the universal or existential reading."""

    return _eval_compiled(CompiledNetwork(net), state, expr, universal=universal)


__all__ = [
    "Checker",
    "CompiledNetwork",
    "Move",
    "Stats",
    "Status",
    "Step",
    "SymbolicState",
    "Trace",
    "TraceEntry",
    "Verdict",
    "check_bounded_response",
    "check_deadlock_free",
    "check_invariant",
    "check_leads_to",
    "check_reachability",
    "eval_expr",
    "initial_state",
    "run_queries",
    "successors",
]
