"""Reference implementations the checker and the DBM library are compared against."""

from __future__ import annotations

import itertools
from collections import deque
from typing import Callable, Iterator, Mapping

from adlv.dbm import INF, Dbm
from adlv.expr import And, Arith, BoolConst, Compare, Const, Expr, Imply, Name, Neg, Not, Or
from adlv.ta import LocationKind, Network, Polarity, max_clock_constants

Pair = tuple[int, bool] | None  # (value, strict); None is +infinity


def _pair(raw: int) -> Pair:
    if raw >= INF:
        return None
    return raw >> 1, (raw & 1) == 0


def _raw(pair: Pair) -> int:
    if pair is None:
        return INF
    value, strict = pair
    return 2 * value + (0 if strict else 1)


def _plus(a: Pair, b: Pair) -> Pair:
    if a is None or b is None:
        return None
    return a[0] + b[0], a[1] or b[1]


def _less(a: Pair, b: Pair) -> bool:
    if a is None:
        return False
    if b is None:
        return True
    return a[0] < b[0] or (a[0] == b[0] and a[1] and not b[1])


def apsp(matrix: list[list[int]]) -> list[list[int]] | None:
    """Floyd-Warshall over (value, strictness) pairs; ``None`` on a negative cycle."""

    n = len(matrix)
    dist = [[_pair(raw) for raw in row] for row in matrix]
    for k in range(n):
        for i in range(n):
            for j in range(n):
                through = _plus(dist[i][k], dist[k][j])
                if _less(through, dist[i][j]):
                    dist[i][j] = through
    for i in range(n):
        if _less(dist[i][i], (0, False)):
            return None
    return [[_raw(pair) for pair in row] for row in dist]


def _satisfies(matrix: list[list[int]], point: tuple[int, ...]) -> bool:
    values = (0,) + point
    n = len(values)
    for i in range(n):
        for j in range(n):
            bound = _pair(matrix[i][j])
            if bound is None:
                continue
            diff = values[i] - values[j]
            if diff > bound[0] or (bound[1] and diff == bound[0]):
                return False
    return True


def lattice_points(d: Dbm, box: int) -> set[tuple[int, ...]]:
    """Integer valuations in ``[0, box]`` per clock that satisfy every entry of ``d``."""

    if d.is_empty():
        return set()
    matrix = d.matrix.tolist()
    clocks = d.clocks
    return {
        point
        for point in itertools.product(range(box + 1), repeat=clocks)
        if _satisfies(matrix, point)
    }


# Discrete-time exploration


def evaluate(expr: Expr, env: Callable[[Name], int]) -> int:
    match expr:
        case Const(value):
            return value
        case BoolConst(value):
            return int(value)
        case Name():
            return env(expr)
        case Neg(operand):
            return -evaluate(operand, env)
        case Arith(op, left, right):
            a, b = evaluate(left, env), evaluate(right, env)
            return a + b if op == "+" else a - b if op == "-" else a * b
        case Compare(op, left, right):
            return int(op.apply(evaluate(left, env), evaluate(right, env)))
        case Not(operand):
            return int(not evaluate(operand, env))
        case And(left, right):
            return int(bool(evaluate(left, env)) and bool(evaluate(right, env)))
        case Or(left, right):
            return int(bool(evaluate(left, env)) or bool(evaluate(right, env)))
        case Imply(left, right):
            return int(not evaluate(left, env) or bool(evaluate(right, env)))
    raise TypeError(f"cannot evaluate {expr!r}")


State = tuple[tuple[int, ...], tuple[int, ...], tuple[tuple[int, ...], ...]]


class DiscreteOracle:
    """Explicit-state exploration with unit delays.

    Clock values are capped one above the largest constant they are compared
    with, which keeps the state space finite and exact for closed constraints.
    ``extra`` raises the caps for constants that only a query mentions.
    """

    def __init__(self, net: Network, extra: Mapping[str, int] | None = None) -> None:
        self.net = net
        self.globals = {decl.name: index for index, decl in enumerate(net.globals)}
        self.locals = [
            {decl.name: index for index, decl in enumerate(ta.data_vars)} for ta in net.automata
        ]
        constants = dict(max_clock_constants(net))
        for clock, value in (extra or {}).items():
            constants[clock] = max(constants.get(clock, 0), value)
        self.caps = [
            tuple(constants[f"{ta.name}.{clock}"] + 1 for clock in ta.clocks)
            for ta in net.automata
        ]

    def initial(self) -> State:
        net = self.net
        return (
            tuple(ta.initial for ta in net.automata),
            tuple(decl.initial for decl in net.globals)
            + tuple(decl.initial for ta in net.automata for decl in ta.data_vars),
            tuple(tuple(0 for _ in ta.clocks) for ta in net.automata),
        )

    def _offset(self, automaton: int) -> int:
        return len(self.net.globals) + sum(len(ta.data_vars) for ta in self.net.automata[:automaton])

    def _env(self, automaton: int, values: tuple[int, ...], clocks: tuple[int, ...]) -> Callable[[Name], int]:
        ta = self.net.automata[automaton]

        def lookup(name: Name) -> int:
            key = name.dotted
            if key in ta.clocks:
                return clocks[ta.clocks.index(key)]
            if key in self.locals[automaton]:
                return values[self._offset(automaton) + self.locals[automaton][key]]
            return values[self.globals[key]]

        return lookup

    def _invariants_hold(self, state: State) -> bool:
        locations, values, clocks = state
        for index, ta in enumerate(self.net.automata):
            inv = ta.invariants.get(locations[index])
            if inv is not None and not evaluate(inv, self._env(index, values, clocks[index])):
                return False
        return True

    def _apply(self, automaton: int, edge_updates, edge_resets, values: list[int], clocks: list[list[int]]) -> None:
        ta = self.net.automata[automaton]
        for assign in edge_updates:
            value = evaluate(assign.value, self._env(automaton, tuple(values), tuple(clocks[automaton])))
            key = assign.target.dotted
            if key in self.locals[automaton]:
                values[self._offset(automaton) + self.locals[automaton][key]] = value
            else:
                values[self.globals[key]] = value
        for reset in edge_resets:
            clocks[automaton][ta.clocks.index(reset.clock)] = reset.value

    def successors(self, state: State) -> Iterator[State]:
        locations, values, clocks = state
        automata = self.net.automata
        kinds = [ta.locations[loc].kind for ta, loc in zip(automata, locations)]
        committed = {i for i, kind in enumerate(kinds) if kind is LocationKind.COMMITTED}
        if not committed and all(kind is LocationKind.NORMAL for kind in kinds):
            delayed = tuple(
                tuple(min(value + 1, cap) for value, cap in zip(own, caps))
                for own, caps in zip(clocks, self.caps)
            )
            candidate = (locations, values, delayed)
            if self._invariants_hold(candidate):
                yield candidate

        def enabled(index: int, edge) -> bool:
            return bool(evaluate(edge.guard, self._env(index, values, clocks[index])))

        for index, ta in enumerate(automata):
            for edge in ta.edges_from(locations[index]):
                if edge.action is not None and edge.action.polarity is Polarity.RECEIVE:
                    continue
                if not enabled(index, edge):
                    continue
                options: list[list[tuple[int, object]]] = [[(index, edge)]]
                if edge.action is not None:
                    for other, other_ta in enumerate(automata):
                        if other == index:
                            continue
                        receivers = [
                            e
                            for e in other_ta.edges_from(locations[other])
                            if e.action is not None
                            and e.action.polarity is Polarity.RECEIVE
                            and e.action.channel == edge.action.channel
                            and enabled(other, e)
                        ]
                        if receivers:
                            options.append([(other, e) for e in receivers])
                for combo in itertools.product(*options):
                    if committed and not any(i in committed for i, _ in combo):
                        continue
                    new_locations = list(locations)
                    new_values = list(values)
                    new_clocks = [list(c) for c in clocks]
                    for i, e in combo:
                        self._apply(i, e.updates, e.resets, new_values, new_clocks)  # type: ignore[attr-defined]
                        new_locations[i] = e.target  # type: ignore[attr-defined]
                    candidate = (
                        tuple(new_locations),
                        tuple(new_values),
                        tuple(tuple(c) for c in new_clocks),
                    )
                    if self._invariants_hold(candidate):
                        yield candidate

    def reachable(self) -> set[State]:
        start = self.initial()
        if not self._invariants_hold(start):
            return set()
        seen = {start}
        queue = deque([start])
        while queue:
            for successor in self.successors(queue.popleft()):
                if successor not in seen:
                    seen.add(successor)
                    queue.append(successor)
        return seen

    def holds(self, state: State, expr: Expr) -> bool:
        """Evaluate a predicate with ``Automaton.Location`` atoms and clock values."""

        locations, values, clocks = state
        names = {ta.name: i for i, ta in enumerate(self.net.automata)}

        def lookup(name: Name) -> int:
            if len(name.parts) == 2 and name.parts[0] in names:
                index = names[name.parts[0]]
                ta = self.net.automata[index]
                part = name.parts[1]
                if part in ta.clocks:
                    return clocks[index][ta.clocks.index(part)]
                if part in self.locals[index]:
                    return values[self._offset(index) + self.locals[index][part]]
                return int(ta.locations[locations[index]].name == part)
            return values[self.globals[name.dotted]]

        return bool(evaluate(expr, lookup))


def location_names(net: Network, state: State) -> Mapping[str, str]:
    return {ta.name: ta.locations[loc].name for ta, loc in zip(net.automata, state[0])}
