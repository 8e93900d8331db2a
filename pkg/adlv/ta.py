"""Timed automata networks: the target of the transformation and the checker input."""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping

from .diagnostics import Diagnostic, Rule
from .expr import (
    TRUE,
    Assignment,
    CmpOp,
    Compare,
    Const,
    Expr,
    Name,
    conjoin,
    conjuncts,
    names,
    to_dsl,
    walk,
)
from .model import VariableDecl

logger = logging.getLogger(__name__)


class LocationKind(str, Enum):
    NORMAL = "normal"
    URGENT = "urgent"
    COMMITTED = "committed"


class Polarity(str, Enum):
    EMIT = "!"
    RECEIVE = "?"


class EdgeTag(str, Enum):
    """Role of an edge in the generated read/compute/write cycle."""

    PLAIN = "plain"
    READ = "read"
    WRITE = "write"


@dataclass(frozen=True, slots=True)
class Location:
    name: str
    kind: LocationKind = LocationKind.NORMAL
    role: str | None = field(default=None, compare=False)

    @property
    def stops_time(self) -> bool:
        return self.kind is not LocationKind.NORMAL


@dataclass(frozen=True, slots=True)
class ChannelAction:
    channel: str
    polarity: Polarity

    @classmethod
    def emit(cls, channel: str) -> ChannelAction:
        return cls(channel, Polarity.EMIT)

    @classmethod
    def receive(cls, channel: str) -> ChannelAction:
        return cls(channel, Polarity.RECEIVE)

    def __str__(self) -> str:
        return f"{self.channel}{self.polarity.value}"


@dataclass(frozen=True, slots=True)
class ClockReset:
    clock: str
    value: int = 0

    def __str__(self) -> str:
        return f"{self.clock} := {self.value}"


@dataclass(frozen=True, slots=True)
class Edge:
    source: int
    target: int
    guard: Expr = TRUE
    action: ChannelAction | None = None
    updates: tuple[Assignment, ...] = ()
    resets: tuple[ClockReset, ...] = ()
    tag: EdgeTag = field(default=EdgeTag.PLAIN, compare=False)


@dataclass(frozen=True, slots=True)
class ClockAtom:
    """A guard or invariant conjunct ``clock op value``."""

    clock: str
    op: CmpOp
    value: int

    def to_expr(self) -> Expr:
        return Compare(self.op, Name((self.clock,)), Const(self.value))


@dataclass(frozen=True, slots=True)
class TimedAutomaton:
    """One process of a network.

    ``trigger`` names the global activation variable the automaton consumes
    and ``latch`` the local copy a time-triggered automaton carries across
    its period; both are ``None`` for the environment and the observer.
    """

    name: str
    locations: tuple[Location, ...]
    initial: int = 0
    clocks: tuple[str, ...] = ()
    data_vars: tuple[VariableDecl, ...] = ()
    edges: tuple[Edge, ...] = ()
    invariants: Mapping[int, Expr] = field(default_factory=dict)
    final_exec: int | None = None
    template: str | None = None
    trigger: str | None = None
    latch: str | None = None

    def location_index(self, name: str) -> int:
        for index, location in enumerate(self.locations):
            if location.name == name:
                return index
        raise KeyError(f"{self.name} has no location {name}")

    def invariant(self, index: int) -> Expr:
        return self.invariants.get(index, TRUE)

    def edges_from(self, index: int) -> list[Edge]:
        return [edge for edge in self.edges if edge.source == index]

    @property
    def template_name(self) -> str:
        return self.template or self.name


@dataclass(frozen=True, slots=True)
class Network:
    automata: tuple[TimedAutomaton, ...] = ()
    channels: tuple[str, ...] = ()
    globals: tuple[VariableDecl, ...] = ()

    def automaton(self, name: str) -> TimedAutomaton:
        for automaton in self.automata:
            if automaton.name == name:
                return automaton
        raise KeyError(f"no automaton {name}")

    def extended(self, automaton: TimedAutomaton, channels: Iterable[str] = ()) -> Network:
        """Return a copy with ``automaton`` appended and any new channels declared."""

        declared = list(self.channels)
        declared.extend(chan for chan in channels if chan not in declared)
        return Network(self.automata + (automaton,), tuple(declared), self.globals)


def clock_atom(expr: Expr, clocks: Iterable[str]) -> ClockAtom | None:
    """Recognise ``clk op c`` or ``c op clk``; ``None`` for anything else."""

    if not isinstance(expr, Compare):
        return None
    clock_set = set(clocks)
    left, right, op = expr.left, expr.right, expr.op
    if isinstance(left, Const) and isinstance(right, Name):
        left, right, op = right, left, op.flipped()
    if isinstance(left, Name) and left.dotted in clock_set and isinstance(right, Const):
        return ClockAtom(left.dotted, op, right.value)
    return None


def mentions_clock(expr: Expr, clocks: Iterable[str]) -> bool:
    clock_set = set(clocks)
    return any(ref.dotted in clock_set for ref in names(expr))


def split_guard(guard: Expr, clocks: Iterable[str]) -> tuple[Expr, list[ClockAtom]]:
    """Separate a guard into its data predicate and its clock conjuncts.

    Raises ``ValueError`` when a clock appears outside a top-level atom.
    """

    clock_list = list(clocks)
    data: list[Expr] = []
    atoms: list[ClockAtom] = []
    for part in conjuncts(guard):
        atom = clock_atom(part, clock_list)
        if atom is not None and atom.op is not CmpOp.NE:
            atoms.append(atom)
        elif mentions_clock(part, clock_list):
            raise ValueError(f"clock used outside a simple constraint: {to_dsl(part)}")
        else:
            data.append(part)
    return conjoin(data), atoms


def _local_names(ta: TimedAutomaton) -> set[str]:
    return set(ta.clocks) | {decl.name for decl in ta.data_vars}


def _check_automaton(
    ta: TimedAutomaton, channels: set[str], global_names: set[str]
) -> list[Diagnostic]:
    out: list[Diagnostic] = []
    count = len(ta.locations)
    if not 0 <= ta.initial < count:
        out.append(Diagnostic(Rule.BAD_INITIAL, ta.name, f"initial index {ta.initial} out of range"))
    for name, seen in Counter(loc.name for loc in ta.locations).items():
        if seen > 1:
            out.append(Diagnostic(Rule.DUPLICATE_LOCATION, f"{ta.name}.{name}", "location declared twice"))
    local_counts = Counter(list(ta.clocks) + [decl.name for decl in ta.data_vars])
    for name, seen in local_counts.items():
        if seen > 1:
            out.append(Diagnostic(Rule.DUPLICATE_CLOCK, f"{ta.name}.{name}", "local name declared twice"))
        if name in global_names:
            out.append(Diagnostic(Rule.SHADOWED_GLOBAL, f"{ta.name}.{name}", "local shadows a global"))

    data_names = {decl.name for decl in ta.data_vars} | global_names
    readable = data_names | set(ta.clocks)

    def unknown(expr: Expr, where: str) -> None:
        for ref in names(expr):
            if ref.qualifier is not None or ref.base not in readable:
                out.append(Diagnostic(Rule.UNKNOWN_VARIABLE, where, f"unknown name {ref.dotted}"))

    for index, inv in ta.invariants.items():
        where = f"{ta.name}.{ta.locations[index].name}" if 0 <= index < count else ta.name
        unknown(inv, where)
        for part in conjuncts(inv):
            atom = clock_atom(part, ta.clocks)
            if atom is None or atom.op not in (CmpOp.LE, CmpOp.LT):
                out.append(
                    Diagnostic(Rule.INVARIANT_NOT_UPPER, where, f"{to_dsl(part)} is not an upper bound")
                )

    for position, edge in enumerate(ta.edges):
        where = f"{ta.name}:edge{position}"
        if not (0 <= edge.source < count and 0 <= edge.target < count):
            out.append(Diagnostic(Rule.BAD_EDGE_ENDPOINT, where, "edge endpoint out of range"))
        if edge.action is not None and edge.action.channel not in channels:
            out.append(
                Diagnostic(Rule.UNDECLARED_CHANNEL, where, f"channel {edge.action.channel} not declared")
            )
        unknown(edge.guard, where)
        try:
            _, atoms = split_guard(edge.guard, ta.clocks)
        except ValueError as exc:
            out.append(Diagnostic(Rule.CLOCK_GUARD_FORM, where, str(exc)))
            atoms = []
        if atoms and edge.action is not None and edge.action.polarity is Polarity.RECEIVE:
            out.append(
                Diagnostic(Rule.RECEIVER_CLOCK_GUARD, where, "receiving edges cannot test clocks")
            )
        for assign in edge.updates:
            if assign.target.qualifier is not None or assign.target.base not in data_names:
                out.append(
                    Diagnostic(Rule.UNKNOWN_VARIABLE, where, f"cannot assign {assign.target.dotted}")
                )
            unknown(assign.value, where)
            if mentions_clock(assign.value, ta.clocks):
                out.append(Diagnostic(Rule.CLOCK_GUARD_FORM, where, "clock read in an update"))
        for reset in edge.resets:
            if reset.clock not in ta.clocks or reset.value < 0:
                out.append(Diagnostic(Rule.BAD_RESET, where, f"invalid reset {reset}"))
    return out


def validate_ta(net: Network) -> list[Diagnostic]:
    """Check every well-formedness rule of ``net``; empty means valid."""

    diagnostics: list[Diagnostic] = []
    for name, seen in Counter(ta.name for ta in net.automata).items():
        if seen > 1:
            diagnostics.append(Diagnostic(Rule.DUPLICATE_AUTOMATON, name, "automaton name used twice"))
    channels = set(net.channels)
    global_names = {decl.name for decl in net.globals}
    for ta in net.automata:
        diagnostics.extend(_check_automaton(ta, channels, global_names))
    if diagnostics:
        logger.debug("network: %d diagnostic(s)", len(diagnostics))
    return diagnostics


def max_clock_constants(net: Network) -> dict[str, int]:
    """Largest constant each clock is compared with, keyed ``Automaton.clock``."""

    result: dict[str, int] = {}
    for ta in net.automata:
        local = {clock: 0 for clock in ta.clocks}
        constraints = list(ta.invariants.values()) + [edge.guard for edge in ta.edges]
        for expr in constraints:
            for part in walk(expr):
                atom = clock_atom(part, ta.clocks)
                if atom is not None:
                    local[atom.clock] = max(local[atom.clock], abs(atom.value))
        for edge in ta.edges:
            for reset in edge.resets:
                if reset.clock in local:
                    local[reset.clock] = max(local[reset.clock], reset.value)
        result.update({f"{ta.name}.{clock}": bound for clock, bound in local.items()})
    return result


def live_clocks(ta: TimedAutomaton) -> tuple[frozenset[str], ...]:
    """Per location, the clocks whose current value can still be tested.

    A clock is dead in a location when every path from it resets the clock
    before a guard or an invariant reads it.
    """

    def tested(expr: Expr) -> set[str]:
        return {ref.dotted for ref in names(expr) if ref.dotted in ta.clocks}

    live = [tested(ta.invariant(index)) for index in range(len(ta.locations))]
    changed = True
    while changed:
        changed = False
        for edge in ta.edges:
            reset = {r.clock for r in edge.resets}
            needed = tested(edge.guard) | (live[edge.target] - reset)
            if not needed <= live[edge.source]:
                live[edge.source] |= needed
                changed = True
    return tuple(frozenset(clocks) for clocks in live)


def _decl_text(decl: VariableDecl) -> str:
    return f"var {decl.name}: {decl.data_type} = {decl.initial}"


def _edge_text(ta: TimedAutomaton, edge: Edge) -> str:
    parts = [f"{ta.locations[edge.source].name} --"]
    if edge.guard != TRUE:
        parts.append(f"[{to_dsl(edge.guard)}]")
    if edge.action is not None:
        parts.append(str(edge.action))
    effects = [str(assign) for assign in edge.updates] + [str(reset) for reset in edge.resets]
    if effects:
        parts.append("/ " + ", ".join(effects))
    parts.append(f"--> {ta.locations[edge.target].name}")
    return " ".join(parts)


def dump_ta(net: Network) -> str:
    """Render the human-readable ``.ta`` listing of ``net``.

    The output is a pure function of the network, one block per automaton.
    """

    lines = ["network"]
    if net.channels:
        lines.append("  broadcast chan " + ", ".join(net.channels))
    lines.extend(f"  {_decl_text(decl)}" for decl in net.globals)
    for ta in net.automata:
        lines.append("")
        header = f"automaton {ta.name}"
        if ta.template and ta.template != ta.name:
            header += f" ({ta.template})"
        lines.append(header)
        if ta.clocks:
            lines.append("  clock " + ", ".join(ta.clocks))
        lines.extend(f"  {_decl_text(decl)}" for decl in ta.data_vars)
        for index, location in enumerate(ta.locations):
            text = f"  location {location.name}"
            if index == ta.initial:
                text += " initial"
            if location.kind is not LocationKind.NORMAL:
                text += f" {location.kind.value}"
            if index in ta.invariants:
                text += f" inv {to_dsl(ta.invariants[index])}"
            lines.append(text)
        lines.extend(f"  edge {_edge_text(ta, edge)}" for edge in ta.edges)
    return "\n".join(lines) + "\n"


__all__ = [
    "ChannelAction",
    "ClockAtom",
    "ClockReset",
    "Edge",
    "EdgeTag",
    "Location",
    "LocationKind",
    "Network",
    "Polarity",
    "TimedAutomaton",
    "clock_atom",
    "dump_ta",
    "live_clocks",
    "max_clock_constants",
    "mentions_clock",
    "split_guard",
    "validate_ta",
]
