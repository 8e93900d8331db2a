"""Symbolic states and the network successor relation.

A ``CompiledNetwork`` flattens a ``Network`` once: every variable gets a slot
in the discrete vector (globals first, then locals as ``Automaton.name``),
every clock an index in the zone, and every guard and update becomes a
closure over ``(locations, discretes)``.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .. import dbm
from ..dbm import Constraint, Dbm
from ..errors import EmptyInitial, QueryError, RangeError
from ..expr import (
    And,
    Arith,
    BoolConst,
    CmpOp,
    Compare,
    Const,
    Deadlock,
    Expr,
    Imply,
    Name,
    Neg,
    Not,
    Or,
    names,
    to_dsl,
    walk,
)
from ..model import DataType
from ..ta import (
    ChannelAction,
    LocationKind,
    Network,
    Polarity,
    live_clocks,
    max_clock_constants,
    split_guard,
)

logger = logging.getLogger(__name__)

Locs = Sequence[int]
Values = Sequence[int]
Eval = Callable[[Locs, Values], int]
Dnf = list[tuple[Constraint, ...]]

_TRUE_DNF: Dnf = [()]
_FALSE_DNF: Dnf = []


@dataclass(frozen=True, slots=True)
class SymbolicState:
    """Locations, discrete valuation and a closed, delay-saturated zone."""

    locations: tuple[int, ...]
    discretes: tuple[int, ...]
    zone: Dbm

    @property
    def key(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        return self.locations, self.discretes


@dataclass(frozen=True, slots=True)
class Move:
    automaton: int
    edge: int
    source: int
    target: int


@dataclass(frozen=True, slots=True)
class Step:
    """The edge set fired by one action transition."""

    channel: str | None
    moves: tuple[Move, ...]


@dataclass(frozen=True, slots=True)
class _Update:
    slot: int
    value: Eval


@dataclass(frozen=True, slots=True)
class _Edge:
    automaton: int
    index: int
    source: int
    target: int
    guard: Eval
    clock_guard: tuple[Constraint, ...]
    action: ChannelAction | None
    updates: tuple[_Update, ...]
    resets: tuple[tuple[int, int], ...]


def _arith(op: str, left: Eval, right: Eval) -> Eval:
    match op:
        case "+":
            return lambda L, D: left(L, D) + right(L, D)
        case "-":
            return lambda L, D: left(L, D) - right(L, D)
        case "*":
            return lambda L, D: left(L, D) * right(L, D)
    raise TypeError(f"unknown operator {op}")  # pragma: no cover - defensive guard


def compile_expr(expr: Expr, lookup: Callable[[Name], Eval]) -> Eval:
    """Compile a data expression; booleans evaluate to 0 or 1."""

    match expr:
        case Const(value):
            return lambda L, D: value
        case BoolConst(value):
            flag = int(value)
            return lambda L, D: flag
        case Name():
            return lookup(expr)
        case Neg(operand):
            inner = compile_expr(operand, lookup)
            return lambda L, D: -inner(L, D)
        case Arith(op, left, right):
            return _arith(op, compile_expr(left, lookup), compile_expr(right, lookup))
        case Compare(op, left, right):
            lhs, rhs, test = compile_expr(left, lookup), compile_expr(right, lookup), op.apply
            return lambda L, D: int(test(lhs(L, D), rhs(L, D)))
        case Not(operand):
            inner = compile_expr(operand, lookup)
            return lambda L, D: int(not inner(L, D))
        case And(left, right):
            lhs, rhs = compile_expr(left, lookup), compile_expr(right, lookup)
            return lambda L, D: int(bool(lhs(L, D)) and bool(rhs(L, D)))
        case Or(left, right):
            lhs, rhs = compile_expr(left, lookup), compile_expr(right, lookup)
            return lambda L, D: int(bool(lhs(L, D)) or bool(rhs(L, D)))
        case Imply(left, right):
            lhs, rhs = compile_expr(left, lookup), compile_expr(right, lookup)
            return lambda L, D: int(not lhs(L, D) or bool(rhs(L, D)))
        case Deadlock():
            raise QueryError("deadlock is only meaningful in 'A[] not deadlock'")
    raise TypeError(f"not an expression: {expr!r}")  # pragma: no cover - defensive guard


def _atom_dnf(clock: int, op: CmpOp, value: int) -> Dnf:
    if op is CmpOp.NE:
        return [
            dbm.clock_constraints(clock, CmpOp.LT, value),
            dbm.clock_constraints(clock, CmpOp.GT, value),
        ]
    return [dbm.clock_constraints(clock, op, value)]


def _product(left: Dnf, right: Dnf) -> Dnf:
    return [a + b for a in left for b in right]


def _interval(expr: Expr, ranges: Mapping[str, DataType]) -> tuple[int, int]:
    match expr:
        case Const(value):
            return value, value
        case Name() if expr.dotted in ranges:
            data_type = ranges[expr.dotted]
            return data_type.lo, data_type.hi
        case Neg(operand):
            lo, hi = _interval(operand, ranges)
            return -hi, -lo
        case Arith(op, left, right):
            a, b = _interval(left, ranges)
            c, d = _interval(right, ranges)
            if op == "+":
                return a + c, b + d
            if op == "-":
                return a - d, b - c
            products = (a * c, a * d, b * c, b * d)
            return min(products), max(products)
    return 0, 1


def query_clock_constants(network: Network, exprs: Iterable[Expr]) -> dict[str, int]:
    """Clocks compared in ``exprs`` with the largest magnitude each is compared against.

    Non-constant sides are bounded through the ranges of the variables they read.
    """

    clocks = {f"{ta.name}.{clock}" for ta in network.automata for clock in ta.clocks}
    ranges = {decl.name: decl.data_type for decl in network.globals}
    for ta in network.automata:
        ranges.update({f"{ta.name}.{decl.name}": decl.data_type for decl in ta.data_vars})
    result: dict[str, int] = {}
    for expr in exprs:
        for part in walk(expr):
            if not isinstance(part, Compare):
                continue
            for side, other in ((part.left, part.right), (part.right, part.left)):
                if isinstance(side, Name) and side.dotted in clocks:
                    lo, hi = _interval(other, ranges)
                    bound = max(abs(lo), abs(hi))
                    result[side.dotted] = max(result.get(side.dotted, 0), bound)
    return result


Formula = Callable[[Locs, Values, bool], Dnf]


class CompiledNetwork:
    """Executable form of a network: initial state and successors."""

    def __init__(
        self,
        network: Network,
        *,
        extrapolate: bool = True,
        query_constants: Mapping[str, int] | None = None,
    ) -> None:
        """``query_constants`` maps the clocks a query compares to their largest constant.

        Those clocks are never freed and extrapolate no lower than the query needs.
        """

        self.network = network
        self.extrapolate = extrapolate
        self.var_names: list[str] = []
        self.var_types: list[DataType] = []
        initial: list[int] = []
        for decl in network.globals:
            self.var_names.append(decl.name)
            self.var_types.append(decl.data_type)
            initial.append(decl.initial)
        for ta in network.automata:
            for decl in ta.data_vars:
                self.var_names.append(f"{ta.name}.{decl.name}")
                self.var_types.append(decl.data_type)
                initial.append(decl.initial)
        self.initial_values = tuple(initial)
        self.slots = {name: slot for slot, name in enumerate(self.var_names)}
        self.clock_names = [f"{ta.name}.{clock}" for ta in network.automata for clock in ta.clocks]
        self.clock_index = {name: index for index, name in enumerate(self.clock_names, start=1)}
        self.automaton_index = {ta.name: index for index, ta in enumerate(network.automata)}
        self.kinds = [[loc.kind for loc in ta.locations] for ta in network.automata]

        observed = dict(query_constants or {})
        self.max_constants = np.zeros(len(self.clock_names) + 1, dtype=np.int64)
        for name, value in max_clock_constants(network).items():
            self.max_constants[self.clock_index[name]] = max(value, observed.get(name, 0))
        self.dead: list[list[tuple[int, ...]]] = []
        for ta in network.automata:
            kept = {clock for clock in ta.clocks if f"{ta.name}.{clock}" in observed}
            self.dead.append(
                [
                    tuple(
                        self.clock_index[f"{ta.name}.{clock}"]
                        for clock in ta.clocks
                        if clock not in live and clock not in kept
                    )
                    for live in live_clocks(ta)
                ]
            )
        self.invariants: list[list[tuple[Constraint, ...]]] = []
        self.active: list[list[list[_Edge]]] = []
        self.receivers: list[list[dict[str, list[_Edge]]]] = []
        for a, ta in enumerate(network.automata):
            scope = self._scope(a)
            invs: list[tuple[Constraint, ...]] = []
            for index in range(len(ta.locations)):
                _, atoms = split_guard(ta.invariant(index), ta.clocks)
                invs.append(
                    tuple(
                        c
                        for atom in atoms
                        for c in dbm.clock_constraints(scope.clock(atom.clock), atom.op, atom.value)
                    )
                )
            self.invariants.append(invs)
            active: list[list[_Edge]] = [[] for _ in ta.locations]
            receivers: list[dict[str, list[_Edge]]] = [{} for _ in ta.locations]
            for position, edge in enumerate(ta.edges):
                data, atoms = split_guard(edge.guard, ta.clocks)
                compiled = _Edge(
                    automaton=a,
                    index=position,
                    source=edge.source,
                    target=edge.target,
                    guard=compile_expr(data, scope.lookup),
                    clock_guard=tuple(
                        c
                        for atom in atoms
                        for c in dbm.clock_constraints(scope.clock(atom.clock), atom.op, atom.value)
                    ),
                    action=edge.action,
                    updates=tuple(
                        _Update(scope.slot(assign.target), compile_expr(assign.value, scope.lookup))
                        for assign in edge.updates
                    ),
                    resets=tuple((scope.clock(r.clock), r.value) for r in edge.resets),
                )
                if edge.action is not None and edge.action.polarity is Polarity.RECEIVE:
                    receivers[edge.source].setdefault(edge.action.channel, []).append(compiled)
                else:
                    active[edge.source].append(compiled)
            self.active.append(active)
            self.receivers.append(receivers)

    def _scope(self, automaton: int) -> _Scope:
        return _Scope(self, self.network.automata[automaton].name)

    # states

    def _stops_time(self, locations: Locs) -> bool:
        return any(
            self.kinds[a][loc] is not LocationKind.NORMAL for a, loc in enumerate(locations)
        )

    def _all_invariants(self, locations: Locs) -> list[Constraint]:
        return [c for a, loc in enumerate(locations) for c in self.invariants[a][loc]]

    def _close_zone(self, zone: Dbm, locations: Locs) -> Dbm:
        zone = dbm.free(zone, *(x for a, loc in enumerate(locations) for x in self.dead[a][loc]))
        invariants = self._all_invariants(locations)
        zone = dbm.constrain(zone, invariants)
        if zone.is_empty():
            return zone
        if not self._stops_time(locations):
            zone = dbm.constrain(dbm.up(zone), invariants)
        if self.extrapolate:
            zone = dbm.extrapolate(zone, self.max_constants[1:])
        return zone

    def initial_state(self) -> SymbolicState:
        locations = tuple(ta.initial for ta in self.network.automata)
        zone = self._close_zone(dbm.dbm_init(len(self.clock_names)), locations)
        if zone.is_empty():
            raise EmptyInitial("initial invariants are unsatisfiable at time zero")
        return SymbolicState(locations, self.initial_values, zone)

    def can_idle_forever(self, state: SymbolicState) -> bool:
        """True when no invariant or urgency bounds the delay in ``state``."""

        if self._stops_time(state.locations):
            return False
        return not self._all_invariants(state.locations)

    def successors(self, state: SymbolicState) -> list[tuple[Step, SymbolicState]]:
        """Action successors of ``state``, each already delay-closed.

        Raises ``RangeError`` when an enabled update leaves a variable range.
        """

        locs, values = state.locations, state.discretes
        committed = any(
            self.kinds[a][loc] is LocationKind.COMMITTED for a, loc in enumerate(locs)
        )
        result: list[tuple[Step, SymbolicState]] = []
        for a, loc in enumerate(locs):
            for edge in self.active[a][loc]:
                if not edge.guard(locs, values):
                    continue
                choices: list[list[_Edge]] = []
                if edge.action is not None:
                    channel = edge.action.channel
                    for b, other in enumerate(locs):
                        if b == a:
                            continue
                        enabled = [
                            r for r in self.receivers[b][other].get(channel, ()) if r.guard(locs, values)
                        ]
                        if enabled:
                            choices.append(enabled)
                for group in itertools.product(*choices):
                    participants = (edge, *group)
                    if committed and not any(
                        self.kinds[p.automaton][p.source] is LocationKind.COMMITTED
                        for p in participants
                    ):
                        continue
                    successor = self._fire(state, participants)
                    if successor is None:
                        continue
                    step = Step(
                        edge.action.channel if edge.action is not None else None,
                        tuple(Move(p.automaton, p.index, p.source, p.target) for p in participants),
                    )
                    result.append((step, successor))
        return result

    def _fire(self, state: SymbolicState, participants: Sequence[_Edge]) -> SymbolicState | None:
        zone = dbm.constrain(state.zone, [c for edge in participants for c in edge.clock_guard])
        if zone.is_empty():
            return None
        values = list(state.discretes)
        for edge in participants:
            for update in edge.updates:
                value = update.value(state.locations, values)
                bounds = self.var_types[update.slot]
                if not bounds.contains(value):
                    raise RangeError(self.var_names[update.slot], value, bounds.lo, bounds.hi)
                values[update.slot] = value
        for edge in participants:
            for clock, value in edge.resets:
                zone = dbm.reset(zone, clock, value)
        locations = list(state.locations)
        for edge in participants:
            locations[edge.automaton] = edge.target
        zone = self._close_zone(zone, locations)
        if zone.is_empty():
            return None
        return SymbolicState(tuple(locations), tuple(values), zone)

    # queries

    def _query_lookup(self, name: Name) -> Eval:
        symbol = self.resolve(name)
        match symbol:
            case ("location", automaton, location):
                return lambda L, D: int(L[automaton] == location)
            case ("variable", slot, _):
                return lambda L, D: D[slot]
        raise QueryError(f"{name.dotted} is a clock; compare it with a constant")

    def resolve(self, name: Name) -> tuple[str, int, int]:
        """Classify a query identifier as location, variable or clock."""

        dotted = name.dotted
        if dotted in self.slots:
            return ("variable", self.slots[dotted], 0)
        if dotted in self.clock_index:
            return ("clock", self.clock_index[dotted], 0)
        if len(name.parts) == 2 and name.parts[0] in self.automaton_index:
            automaton = self.automaton_index[name.parts[0]]
            for index, location in enumerate(self.network.automata[automaton].locations):
                if location.name == name.parts[1]:
                    return ("location", automaton, index)
        raise QueryError(f"unresolved identifier {dotted}")

    def _clock_side(self, expr: Expr) -> int | None:
        if isinstance(expr, Name) and expr.dotted in self.clock_index:
            return self.clock_index[expr.dotted]
        return None

    def compile_formula(self, expr: Expr) -> Formula:
        """Compile a query expression into a DNF builder over clock constraints.

        Calling the result with ``positive=False`` builds the negation.
        """

        match expr:
            case Not(operand):
                inner = self.compile_formula(operand)
                return lambda L, D, pos: inner(L, D, not pos)
            case And(left, right):
                lhs, rhs = self.compile_formula(left), self.compile_formula(right)

                def conj(L: Locs, D: Values, pos: bool) -> Dnf:
                    first = lhs(L, D, pos)
                    if pos:
                        return _product(first, rhs(L, D, True)) if first else _FALSE_DNF
                    return first + rhs(L, D, False)

                return conj
            case Or(left, right):
                lhs, rhs = self.compile_formula(left), self.compile_formula(right)

                def disj(L: Locs, D: Values, pos: bool) -> Dnf:
                    if pos:
                        return lhs(L, D, True) + rhs(L, D, True)
                    first = lhs(L, D, False)
                    return _product(first, rhs(L, D, False)) if first else _FALSE_DNF

                return disj
            case Imply(left, right):
                return self.compile_formula(Or(Not(left), right))
            case Compare(op, left, right) if (
                self._clock_side(left) is not None or self._clock_side(right) is not None
            ):
                clock = self._clock_side(left)
                other = right
                if clock is None:
                    clock, other, op = self._clock_side(right), left, op.flipped()
                assert clock is not None
                if any(ref.dotted in self.clock_index for ref in names(other)):
                    raise QueryError(f"clock differences are not supported: {to_dsl(expr)}")
                value = compile_expr(other, self._query_lookup)
                return lambda L, D, pos: _atom_dnf(clock, op if pos else op.negated(), value(L, D))
        predicate = compile_expr(expr, self._query_lookup)
        return lambda L, D, pos: _TRUE_DNF if bool(predicate(L, D)) == pos else _FALSE_DNF


class _Scope:
    """Name resolution inside one automaton: locals shadow nothing, globals follow."""

    def __init__(self, compiled: CompiledNetwork, automaton: str) -> None:
        self.compiled = compiled
        self.automaton = automaton

    def slot(self, name: Name) -> int:
        local = f"{self.automaton}.{name.dotted}"
        if local in self.compiled.slots:
            return self.compiled.slots[local]
        if name.dotted in self.compiled.slots:
            return self.compiled.slots[name.dotted]
        raise TypeError(f"{self.automaton}: unknown variable {name.dotted}")

    def clock(self, name: str) -> int:
        return self.compiled.clock_index[f"{self.automaton}.{name}"]

    def lookup(self, name: Name) -> Eval:
        slot = self.slot(name)
        return lambda L, D: D[slot]


def exists(formula: Formula, state: SymbolicState) -> bool:
    """Some valuation of the zone satisfies the formula."""

    return any(
        dbm.intersects(state.zone, conj) for conj in formula(state.locations, state.discretes, True)
    )


def forall(formula: Formula, state: SymbolicState) -> bool:
    """Every valuation of the zone satisfies the formula."""

    return not any(
        dbm.intersects(state.zone, conj) for conj in formula(state.locations, state.discretes, False)
    )


def eval_expr(
    network: CompiledNetwork, state: SymbolicState, expr: Expr, *, universal: bool = True
) -> bool:
    formula = network.compile_formula(expr)
    return forall(formula, state) if universal else exists(formula, state)


__all__ = [
    "CompiledNetwork",
    "Move",
    "Step",
    "SymbolicState",
    "compile_expr",
    "eval_expr",
    "exists",
    "forall",
    "query_clock_constants",
]
