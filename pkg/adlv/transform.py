"""Model-to-model compilation of an FAA model into a timed automata network.

Every written input port owns a bounded global buffer ``Connect_<F>_<port>``;
connectors become broadcast channels ``<S>_<p>__<T>_<q>``. A function's
automaton copies its buffers into locals on the read edge and publishes its
outputs on the write edges (the XWRITE extension). The activation of a
function is the buffer of its trigger port, or a synthesized ``ConnectT_<F>``
when nothing drives it.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

from .errors import AnnexError, RefineError, RuleError, TransformError
from .expr import (
    Assignment,
    CmpOp,
    Compare,
    Const,
    Expr,
    Imply,
    Name,
    Not,
    TRUE,
    conjoin,
    conjuncts,
    disjoin,
    names,
    rename,
)
from .model import (
    AnalysisFunction,
    BehaviorAnnex,
    ConditionKind,
    Connector,
    DataType,
    EnvSpec,
    EnvWrite,
    FaaModel,
    Policy,
    PortRef,
    VariableDecl,
)
from .queries import Query
from .ta import (
    ChannelAction,
    ClockReset,
    Edge,
    EdgeTag,
    Location,
    LocationKind,
    Network,
    Polarity,
    TimedAutomaton,
    clock_atom,
)

logger = logging.getLogger(__name__)

CLOCK = "clk"
LATCH = "ReceiveTrigg"
OBSERVER_NAME = "Obs"
OBSERVER_CLOCK = "obstime"
TRIGGER_TYPE = DataType.int_range(0, 1)

ROLE_INIT = "Init"
ROLE_RUN = "Run"
ROLE_FINISH = "Finish"
ROLE_DONE = "Done"
ROLE_EMIT = "Emit"
ROLE_SKIP = "Skip"


def _var(name: str) -> Name:
    return Name((name,))


def _eq(name: str, value: int) -> Expr:
    return Compare(CmpOp.EQ, _var(name), Const(value))


def _clock_le(value: int, clock: str = CLOCK) -> Expr:
    return Compare(CmpOp.LE, _var(clock), Const(value))


def _assign(target: str, value: Expr | int | str) -> Assignment:
    if isinstance(value, int):
        value = Const(value)
    elif isinstance(value, str):
        value = _var(value)
    return Assignment(_var(target), value)


def _default_initial(data_type: DataType) -> int:
    return 0 if data_type.contains(0) else data_type.lo


@dataclass
class TransformContext:
    """Value-passing globals and channel names shared by every generated automaton."""

    model: FaaModel
    buffers: dict[PortRef, str] = field(default_factory=dict)
    trigger_vars: dict[str, str] = field(default_factory=dict)
    channels: dict[Connector, str] = field(default_factory=dict)
    env_values: dict[Connector, Expr] = field(default_factory=dict)
    globals: list[VariableDecl] = field(default_factory=list)

    @classmethod
    def build(cls, model: FaaModel) -> TransformContext:
        ctx = cls(model)
        connectors = list(model.connectors)
        if model.environment is not None:
            for connector, write in ctx._env_connectors(model.environment):
                connectors.append(connector)
                ctx.env_values[connector] = write.value
        for connector in connectors:
            ctx.channels[connector] = (
                f"{ctx.instance(connector.source.function)}_{connector.source.port}__"
                f"{ctx.instance(connector.target.function)}_{connector.target.port}"
            )
        written = {connector.target for connector in connectors}
        for fn in model.functions:
            driven = [port for port in fn.trigger_ports if PortRef(fn.name, port.name) in written]
            initial_active = 1 if fn.trigger.policy is Policy.TIME else 0
            for port in fn.inputs:
                ref = PortRef(fn.name, port.name)
                if ref not in written:
                    continue
                buffer = f"Connect_{fn.instance}_{port.name}"
                ctx.buffers[ref] = buffer
                if port.is_trigger:
                    decl = VariableDecl(buffer, TRIGGER_TYPE, initial_active)
                else:
                    decl = VariableDecl(buffer, port.data_type, _default_initial(port.data_type))
                ctx.globals.append(decl)
            if driven:
                ctx.trigger_vars[fn.name] = ctx.buffers[PortRef(fn.name, driven[0].name)]
            else:
                name = f"ConnectT_{fn.instance}"
                ctx.trigger_vars[fn.name] = name
                ctx.globals.append(VariableDecl(name, TRIGGER_TYPE, initial_active))
        return ctx

    @staticmethod
    def _env_connectors(env: EnvSpec) -> list[tuple[Connector, EnvWrite]]:
        return [
            (Connector(PortRef(env.name, f"w{index}"), write.target), write)
            for index, write in enumerate(env.writes)
        ]

    def instance(self, function: str) -> str:
        fn = self.model.function(function)
        return function if fn is None else fn.instance

    @property
    def connectors(self) -> list[Connector]:
        return list(self.channels)

    def outgoing(self, function: str) -> list[Connector]:
        return [c for c in self.channels if c.source.function == function]

    def is_trigger_target(self, connector: Connector) -> bool:
        port = self.model.resolve(connector.target)
        return port is not None and port.is_trigger

    def trigger_channel(self, fn: AnalysisFunction) -> str | None:
        """Channel of the connector that activates ``fn``, if any."""

        for connector, channel in self.channels.items():
            if connector.target.function == fn.name and self.is_trigger_target(connector):
                return channel
        return None

    def buffer(self, ref: PortRef) -> str | None:
        return self.buffers.get(ref)

    def trigger_var(self, fn: AnalysisFunction) -> str:
        return self.trigger_vars[fn.name]

    def input_buffers(self, fn: AnalysisFunction) -> dict[str, str]:
        """Data input port name -> buffer for every written, non-trigger input."""

        mapping: dict[str, str] = {}
        for port in fn.inputs:
            buffer = self.buffers.get(PortRef(fn.name, port.name))
            if buffer is not None and not port.is_trigger:
                mapping[port.name] = buffer
        return mapping

    @property
    def channel_names(self) -> list[str]:
        return list(self.channels.values())


# Annex state machines


@dataclass(frozen=True, slots=True)
class _AnnexGraph:
    initial: str
    order: tuple[str, ...]
    finals: tuple[str, ...]
    annex: BehaviorAnnex


def _annex_graph(annex: BehaviorAnnex) -> _AnnexGraph | None:
    if not annex.state_machine:
        return None
    initials = [state.name for state in annex.state_machine if state.initial]
    if len(initials) != 1:
        raise AnnexError(f"state machine needs exactly one initial state, found {len(initials)}")
    declared = {state.name for state in annex.state_machine}
    for state in annex.state_machine:
        for transition in state.transitions:
            if transition.target not in declared:
                raise AnnexError(f"{state.name} targets undeclared state {transition.target}")
    finals = tuple(state.name for state in annex.state_machine if not state.transitions)
    if not finals:
        raise AnnexError("state machine has no final state to leave the execution from")
    order = (initials[0],) + tuple(s.name for s in annex.state_machine if s.name != initials[0])
    return _AnnexGraph(initials[0], order, finals, annex)


def _cumulative_budgets(graph: _AnnexGraph, etime: int) -> dict[str, int] | None:
    """Clock bound per state from its budget and its predecessors'; ``None`` without budgets."""

    states = {state.name: state for state in graph.annex.state_machine}
    if all(state.budget is None for state in states.values()):
        return None
    successors = {name: [t.target for t in state.transitions] for name, state in states.items()}
    cumulative: dict[str, int] = {graph.initial: states[graph.initial].budget or 0}
    visiting: set[str] = set()
    done: set[str] = set()

    def visit(name: str) -> None:
        visiting.add(name)
        for target in successors[name]:
            if target in visiting:
                raise RefineError(f"budgets given on a cyclic state machine ({name} -> {target})")
            total = cumulative[name] + (states[target].budget or 0)
            if cumulative.setdefault(target, total) != total:
                raise RefineError(
                    f"state {target} reached with budgets {cumulative[target]} and {total}"
                )
            if target not in done:
                visit(target)
        visiting.discard(name)
        done.add(name)

    visit(graph.initial)
    for final in graph.finals:
        if final in cumulative and cumulative[final] != etime:
            raise RefineError(
                f"budgets up to final state {final} sum to {cumulative[final]}, expected {etime}"
            )
    return cumulative


def _run_index(ta: TimedAutomaton) -> int:
    for index, location in enumerate(ta.locations):
        if location.role == ROLE_RUN:
            return index
    raise RuleError(f"{ta.name} has no Run location to refine")


def _run_budget(ta: TimedAutomaton, run: int) -> int:
    atom = clock_atom(ta.invariant(run), ta.clocks)
    return 0 if atom is None else atom.value


def refine_run(ta: TimedAutomaton, annex: BehaviorAnnex, etime: int | None = None) -> TimedAutomaton:
    """Replace the step out of Run by the annex state machine.

    Run takes the initial annex state's name, every other annex state becomes a
    location bounded by its cumulative budget (or the whole execution time),
    and each final annex state leaves through a copy of the original exit edge.
    """

    graph = _annex_graph(annex)
    if graph is None:
        return ta
    run = _run_index(ta)
    exits = [position for position, edge in enumerate(ta.edges) if edge.source == run]
    if len(exits) != 1:
        raise RuleError(f"{ta.name}: Run must have exactly one exit edge, found {len(exits)}")
    exit_position = exits[0]
    exit_edge = ta.edges[exit_position]
    budget = _run_budget(ta, run) if etime is None else etime
    cumulative = _cumulative_budgets(graph, budget)
    run_location = ta.locations[run]
    committed_run = run_location.kind is LocationKind.COMMITTED
    if committed_run and cumulative and cumulative[graph.initial] != 0:
        raise RefineError("a committed Run location cannot consume execution budget")

    locations = list(ta.locations)
    locations[run] = Location(graph.initial, run_location.kind, ROLE_RUN)
    invariants = dict(ta.invariants)
    if cumulative is not None and not committed_run:
        invariants[run] = _clock_le(cumulative[graph.initial])
    index = {graph.initial: run}
    inner_kind = LocationKind.URGENT if budget == 0 else LocationKind.NORMAL
    for name in graph.order[1:]:
        index[name] = len(locations)
        locations.append(Location(name, inner_kind, "Annex"))
        bound = budget if cumulative is None else cumulative.get(name, budget)
        invariants[index[name]] = _clock_le(bound)

    annex_edges: list[Edge] = []
    for state in annex.state_machine:
        for transition in state.transitions:
            annex_edges.append(
                Edge(
                    index[state.name],
                    index[transition.target],
                    transition.guard,
                    updates=transition.assignments,
                )
            )
    for final in graph.finals:
        annex_edges.append(replace(exit_edge, source=index[final]))

    edges = list(ta.edges[:exit_position]) + annex_edges + list(ta.edges[exit_position + 1 :])
    logger.debug("refined %s with %d annex state(s)", ta.name, len(graph.order))
    return replace(
        ta, locations=tuple(locations), invariants=invariants, edges=tuple(edges)
    )


# Function automata


def _locals(fn: AnalysisFunction) -> list[VariableDecl]:
    decls = [
        VariableDecl(port.name, port.data_type, _default_initial(port.data_type))
        for port in fn.ports
        if not port.is_trigger
    ]
    decls.extend(fn.behavior.parameters)
    return decls


def _read_payload(fn: AnalysisFunction, ctx: TransformContext) -> tuple[Expr, list[Assignment]]:
    """Guard conjunct from ``pre`` conditions and the copy-then-compute updates."""

    buffers = ctx.input_buffers(fn)
    scope = dict(buffers)
    for port in fn.trigger_ports:
        scope[port.name] = ctx.buffer(PortRef(fn.name, port.name)) or ctx.trigger_var(fn)
    pre = conjoin(rename(expr, scope) for expr in fn.behavior.conditions(ConditionKind.PRE))
    updates = [_assign(port, buffer) for port, buffer in buffers.items()]
    updates.extend(fn.behavior.computations)
    return pre, updates


def transform_af_base(af: AnalysisFunction, ctx: TransformContext | None = None) -> TimedAutomaton:
    """Untimed read/execute/write skeleton of one analysis function.

    ``l_0`` reads when the trigger is active, the annex state machine (if any)
    runs between the committed entry and the committed ``l_f``, and the write
    edge deactivates the trigger.
    """

    ctx = ctx or TransformContext.build(FaaModel(af.name, functions=(af,)))
    graph = _annex_graph(af.behavior)
    trigger = ctx.trigger_var(af)
    pre, updates = _read_payload(af, ctx)
    locations = [Location("Init", role=ROLE_INIT)]
    entry_name = graph.initial if graph is not None else "Exec"
    locations.append(Location(entry_name, LocationKind.COMMITTED, ROLE_RUN))
    edges = [Edge(0, 1, conjoin([_eq(trigger, 1), pre]), updates=tuple(updates), tag=EdgeTag.READ)]
    write = Edge(0, 0, updates=(_assign(trigger, 0),), tag=EdgeTag.WRITE)
    if graph is None:
        final = 1
    else:
        index = {graph.initial: 1}
        for name in graph.order[1:]:
            index[name] = len(locations)
            locations.append(Location(name, role="Annex"))
        final = len(locations)
        locations.append(Location("Done", LocationKind.COMMITTED, ROLE_DONE))
        for state in af.behavior.state_machine:
            for transition in state.transitions:
                edges.append(
                    Edge(
                        index[state.name],
                        index[transition.target],
                        transition.guard,
                        updates=transition.assignments,
                    )
                )
        edges.extend(Edge(index[name], final) for name in graph.finals)
    edges.append(replace(write, source=final))
    return TimedAutomaton(
        name=af.instance,
        locations=tuple(locations),
        data_vars=tuple(_locals(af)),
        edges=tuple(edges),
        final_exec=final,
        template=af.name,
        trigger=trigger,
    )


def apply_time_trigger_rule(af: AnalysisFunction, ctx: TransformContext) -> TimedAutomaton:
    """Periodic template: Init -> Run (committed) -> Finish -> Init.

    Run is bounded by ``clk <= m`` and Finish by ``clk <= n - m``; the write
    edge fires at ``clk >= n - m`` and restores the trigger from the latch.
    A self-clocked function whose ``pre`` can fail waits out the period in
    Skip instead of blocking time in Init.
    """

    period, etime = af.trigger.period, af.trigger.execution_time
    if period is None or etime < 0 or period <= etime:
        raise RuleError(f"time trigger needs period > execution time >= 0, got {period}/{etime}")
    trigger = ctx.trigger_var(af)
    channel = ctx.trigger_channel(af)
    pre, copies = _read_payload(af, ctx)
    idle = period - etime
    locations: tuple[Location, ...] = (
        Location("Init", role=ROLE_INIT),
        Location("Run", LocationKind.COMMITTED, ROLE_RUN),
        Location("Finish", role=ROLE_FINISH),
    )
    activation = conjoin([_eq(trigger, 1), pre])
    invariants: dict[int, Expr] = {1: _clock_le(etime), 2: _clock_le(idle)}
    skips: tuple[Edge, ...] = ()
    if channel is None:
        invariants[0] = _clock_le(0)
        if pre != TRUE:
            locations = (*locations, Location("Skip", role=ROLE_SKIP))
            invariants[3] = _clock_le(period)
            skips = (
                Edge(0, 3, Not(activation), resets=(ClockReset(CLOCK),)),
                Edge(
                    3,
                    0,
                    Compare(CmpOp.GE, _var(CLOCK), Const(period)),
                    resets=(ClockReset(CLOCK),),
                ),
            )
    read = Edge(
        0,
        1,
        activation,
        ChannelAction.receive(channel) if channel is not None else None,
        updates=(_assign(LATCH, trigger), *copies),
        resets=(ClockReset(CLOCK),),
        tag=EdgeTag.READ,
    )
    run = Edge(1, 2, resets=(ClockReset(CLOCK),))
    write = Edge(
        2,
        0,
        Compare(CmpOp.GE, _var(CLOCK), Const(idle)),
        updates=(_assign(trigger, LATCH), _assign(LATCH, 0)),
        resets=(ClockReset(CLOCK),),
        tag=EdgeTag.WRITE,
    )
    ta = TimedAutomaton(
        name=af.instance,
        locations=locations,
        clocks=(CLOCK,),
        data_vars=(*_locals(af), VariableDecl(LATCH, TRIGGER_TYPE, 0)),
        edges=(read, run, write, *skips),
        invariants=invariants,
        final_exec=2,
        template=af.name,
        trigger=trigger,
        latch=LATCH,
    )
    return refine_run(ta, af.behavior, etime)


def apply_event_trigger_rule(af: AnalysisFunction, ctx: TransformContext) -> TimedAutomaton:
    """Event template: Init -(activation?)-> Run -(write)-> Init with ``clk <= etime`` on Run."""

    etime = af.trigger.execution_time
    if etime < 0:
        raise RuleError(f"execution time must be nonnegative, got {etime}")
    trigger = ctx.trigger_var(af)
    channel = ctx.trigger_channel(af)
    pre, copies = _read_payload(af, ctx)
    guard = pre if channel is not None else conjoin([_eq(trigger, 1), pre])
    run_kind = LocationKind.URGENT if etime == 0 else LocationKind.NORMAL
    locations = (Location("Init", role=ROLE_INIT), Location("Run", run_kind, ROLE_RUN))
    read = Edge(
        0,
        1,
        guard,
        ChannelAction.receive(channel) if channel is not None else None,
        updates=tuple(copies),
        resets=(ClockReset(CLOCK),),
        tag=EdgeTag.READ,
    )
    write = Edge(
        1,
        0,
        updates=(_assign(trigger, 0),),
        resets=(ClockReset(CLOCK),),
        tag=EdgeTag.WRITE,
    )
    ta = TimedAutomaton(
        name=af.instance,
        locations=locations,
        clocks=(CLOCK,),
        data_vars=tuple(_locals(af)),
        edges=(read, write),
        invariants={1: _clock_le(etime)},
        final_exec=1,
        template=af.name,
        trigger=trigger,
    )
    return refine_run(ta, af.behavior, etime)


# Write extension


def xwrite(connector: Connector, ctx: TransformContext) -> Assignment:
    """Update publishing ``connector``: activate a trigger port or copy the value."""

    buffer = ctx.buffer(connector.target)
    if buffer is None:  # pragma: no cover - every connector target has a buffer
        raise RuleError(f"no buffer for {connector.target}")
    if ctx.is_trigger_target(connector):
        return _assign(buffer, 1)
    if connector in ctx.env_values:
        return Assignment(_var(buffer), ctx.env_values[connector])
    return _assign(buffer, connector.source.port)


def _emit_chain(
    ta: TimedAutomaton, channels: Sequence[str], target: int, suffix: str
) -> tuple[list[Location], list[Edge], int]:
    """Committed locations emitting ``channels[1:]`` in turn before reaching ``target``."""

    locations: list[Location] = []
    edges: list[Edge] = []
    base = len(ta.locations)
    for position, channel in enumerate(channels[1:], start=1):
        locations.append(Location(f"Emit{suffix}{position}", LocationKind.COMMITTED, ROLE_EMIT))
        source = base + position - 1
        nxt = base + position if position < len(channels) - 1 else target
        edges.append(Edge(source, nxt, action=ChannelAction.emit(channel)))
    first = base if len(channels) > 1 else target
    return locations, edges, first


def extend_writes(
    ta: TimedAutomaton, connectors: Iterable[Connector], ctx: TransformContext
) -> TimedAutomaton:
    """Prefix every WRITE edge's updates with one XWRITE update per outgoing connector.

    The first activation channel is emitted by the write edge itself; further
    ones by a chain of committed locations after it. Other edges are unchanged.
    """

    outgoing = list(connectors)
    writes = [edge for edge in ta.edges if edge.tag is EdgeTag.WRITE]
    if not outgoing or not writes:
        return ta
    payload = tuple(xwrite(connector, ctx) for connector in outgoing)
    channels = [ctx.channels[c] for c in outgoing if ctx.is_trigger_target(c)]
    locations = list(ta.locations)
    extra_edges: list[Edge] = []
    entry: dict[int, int] = {}
    targets = sorted({edge.target for edge in writes})
    for target in targets:
        suffix = "" if len(targets) == 1 else f"{ta.locations[target].name}_"
        scratch = replace(ta, locations=tuple(locations))
        new_locations, chain, first = _emit_chain(scratch, channels, target, suffix)
        locations.extend(new_locations)
        extra_edges.extend(chain)
        entry[target] = first
    edges: list[Edge] = []
    for edge in ta.edges:
        if edge.tag is not EdgeTag.WRITE:
            edges.append(edge)
            continue
        edges.append(
            replace(
                edge,
                target=entry[edge.target],
                action=ChannelAction.emit(channels[0]) if channels else edge.action,
                updates=payload + edge.updates,
            )
        )
    edges.extend(extra_edges)
    return replace(ta, locations=tuple(locations), edges=tuple(edges))


def build_env(env: EnvSpec, ctx: TransformContext) -> TimedAutomaton:
    """Environment automaton performing each declared write once or periodically."""

    pairs = ctx._env_connectors(env)
    once = [(c, w) for c, w in pairs if w.period is None]
    periodic = [(index, c, w) for index, (c, w) in enumerate(pairs) if w.period is not None]
    locations: list[Location] = [
        Location(f"Once{position}", LocationKind.COMMITTED, ROLE_INIT)
        for position in range(len(once))
    ]
    idle = len(locations)
    locations.append(Location("Idle", role=ROLE_INIT if not once else None))
    edges: list[Edge] = []

    def action(connector: Connector) -> ChannelAction | None:
        return ChannelAction.emit(ctx.channels[connector]) if ctx.is_trigger_target(connector) else None

    for position, (connector, _) in enumerate(once):
        edges.append(
            Edge(
                position,
                position + 1,
                action=action(connector),
                updates=(xwrite(connector, ctx),),
                tag=EdgeTag.WRITE,
            )
        )
    clocks = tuple(f"{CLOCK}{index}" for index, _, _ in periodic)
    bounds: list[Expr] = []
    for (index, connector, write), clock in zip(periodic, clocks, strict=True):
        assert write.period is not None
        bounds.append(_clock_le(write.period, clock))
        edges.append(
            Edge(
                idle,
                idle,
                Compare(CmpOp.GE, _var(clock), Const(write.period)),
                action(connector),
                updates=(xwrite(connector, ctx),),
                resets=(ClockReset(clock),),
                tag=EdgeTag.WRITE,
            )
        )
    invariants: dict[int, Expr] = {idle: conjoin(bounds)} if bounds else {}
    return TimedAutomaton(
        name=env.name,
        locations=tuple(locations),
        initial=0,
        clocks=clocks,
        edges=tuple(edges),
        invariants=invariants,
        template=env.name,
    )


def transform_function(af: AnalysisFunction, ctx: TransformContext) -> TimedAutomaton:
    """Apply the trigger rule for ``af`` and extend its write edges."""

    try:
        if af.trigger.policy is Policy.TIME:
            ta = apply_time_trigger_rule(af, ctx)
        else:
            ta = apply_event_trigger_rule(af, ctx)
        logger.debug("%s: %s rule, %d location(s)", af.name, af.trigger.policy.value, len(ta.locations))
        return extend_writes(ta, ctx.outgoing(af.name), ctx)
    except (AnnexError, RefineError, RuleError) as exc:
        raise TransformError(af.name, exc) from exc


def transform_faa(model: FaaModel) -> Network:
    """Compile a validated model into a network: one automaton per function plus the environment."""

    ctx = TransformContext.build(model)
    automata = [transform_function(fn, ctx) for fn in model.functions]
    if model.environment is not None:
        automata.append(build_env(model.environment, ctx))
    return Network(
        automata=tuple(automata),
        channels=tuple(ctx.channel_names),
        globals=tuple(model.globals) + tuple(ctx.globals),
    )


# Observer for bounded response


def build_observer(event1: str, event2: str, max_time: int | None) -> TimedAutomaton:
    """Three-location observer; ``error`` is entered when ``event2`` is late.

    The error edge is guarded ``obstime > max_time``; ``None`` omits it.
    """

    if max_time is not None and max_time < 0:
        raise RuleError("response bound must be nonnegative")
    edges = [
        Edge(0, 1, action=ChannelAction.receive(event1), resets=(ClockReset(OBSERVER_CLOCK),)),
        Edge(1, 0, action=ChannelAction.receive(event2)),
    ]
    if max_time is not None:
        edges.append(Edge(1, 2, Compare(CmpOp.GT, _var(OBSERVER_CLOCK), Const(max_time))))
    return TimedAutomaton(
        name=OBSERVER_NAME,
        locations=(
            Location("Init", role=ROLE_INIT),
            Location("Run", role=ROLE_RUN),
            Location("error", role="Error"),
        ),
        clocks=(OBSERVER_CLOCK,),
        edges=tuple(edges),
        template="Observer",
    )


def observe_event(net: Network, automaton: str, location: str) -> tuple[Network, str]:
    """Make entering ``automaton.location`` emit a fresh channel.

    Entering edges without a channel action emit it directly; the others are
    redirected through a committed relay location that emits it.
    """

    ta = net.automaton(automaton)
    target = ta.location_index(location)
    channel = f"obs_{automaton}_{location}"
    locations = list(ta.locations)
    edges: list[Edge] = []
    relay: int | None = None
    for edge in ta.edges:
        if edge.target != target:
            edges.append(edge)
        elif edge.action is None:
            edges.append(replace(edge, action=ChannelAction.emit(channel)))
        else:
            if relay is None:
                relay = len(locations)
                locations.append(Location(f"{location}_obs", LocationKind.COMMITTED, "Relay"))
            edges.append(replace(edge, target=relay))
    if relay is not None:
        edges.append(Edge(relay, target, action=ChannelAction.emit(channel)))
    observed = replace(ta, locations=tuple(locations), edges=tuple(edges))
    automata = tuple(observed if a.name == automaton else a for a in net.automata)
    return Network(automata, net.channels + (channel,), net.globals), channel


def _event_channel(net: Network, event: Expr | str) -> tuple[Network, str]:
    if isinstance(event, str):
        if event in net.channels:
            return net, event
        event = Name.of(event)
    if isinstance(event, Name):
        if len(event.parts) == 1 and event.dotted in net.channels:
            return net, event.dotted
        if len(event.parts) == 2:
            return observe_event(net, event.parts[0], event.parts[1])
    raise RuleError(f"response events must be channels or Automaton.Location atoms, got {event}")


def attach_observer(
    net: Network, request: Expr | str, response: Expr | str, max_time: int | None
) -> Network:
    """Compose ``net`` with an observer for ``request`` answered by ``response`` within ``max_time``."""

    try:
        net, first = _event_channel(net, request)
        net, second = _event_channel(net, response)
    except KeyError as exc:
        raise RuleError(str(exc)) from None
    return net.extended(build_observer(first, second, max_time))


# Generated properties


def _exit_locations(fn: AnalysisFunction) -> list[str]:
    graph = _annex_graph(fn.behavior)
    if graph is not None:
        return list(graph.finals)
    return ["Finish"] if fn.trigger.policy is Policy.TIME else ["Init"]


def annex_queries(model: FaaModel) -> list[Query]:
    """``post`` and ``invariant`` annex conditions as invariance queries."""

    queries: list[Query] = []
    for fn in model.functions:
        local = {port.name: f"{fn.instance}.{port.name}" for port in fn.ports}
        local.update({p.name: f"{fn.instance}.{p.name}" for p in fn.behavior.parameters})
        exits = disjoin(Name((fn.instance, name)) for name in _exit_locations(fn))
        for kind in (ConditionKind.POST, ConditionKind.INVARIANT):
            for number, expr in enumerate(fn.behavior.conditions(kind), start=1):
                body = rename(expr, local)
                if kind is ConditionKind.POST:
                    body = Imply(exits, body)
                queries.append(Query.invariant(body, label=f"{fn.name}:{kind.value}:{number}"))
    return queries


def function_queries(model: FaaModel) -> list[Query]:
    """One ``E<>`` query per function: its executing location is reachable."""

    queries: list[Query] = []
    for fn in model.functions:
        graph = _annex_graph(fn.behavior)
        run = graph.initial if graph is not None else "Run"
        queries.append(Query.reach(Name((fn.instance, run)), label=f"{fn.name}:executes"))
    return queries


# Structural checks on generated automata


def _is_deactivation(assign: Assignment, ta: TimedAutomaton) -> bool:
    return assign.value == Const(0) and assign.target.dotted in {ta.trigger, ta.latch}


def shape_violations(net: Network, model: FaaModel) -> list[str]:
    """Structural properties every generated function automaton must satisfy."""

    ctx = TransformContext.build(model)
    problems: list[str] = []
    by_instance = {fn.instance: fn for fn in model.functions}
    buffers = set(ctx.buffers.values())
    writers: dict[str, set[str]] = defaultdict(set)
    for connector in ctx.connectors:
        buffer = ctx.buffer(connector.target)
        if buffer is not None:
            writers[buffer].add(ctx.instance(connector.source.function))

    for ta in net.automata:
        fn = by_instance.get(ta.name)
        for edge in ta.edges:
            for assign in edge.updates:
                name = assign.target.dotted
                if name not in buffers or name == ta.trigger:
                    continue
                if edge.tag is not EdgeTag.WRITE or ta.name not in writers[name]:
                    problems.append(f"{ta.name}: {name} updated outside a write of its source")
        if fn is None:
            continue
        initial_edges = [
            edge
            for edge in ta.edges_from(ta.initial)
            if ta.locations[edge.target].role != ROLE_SKIP
        ]
        if len(initial_edges) != 1:
            problems.append(f"{ta.name}: {len(initial_edges)} edges leave l_0, expected 1")
        else:
            read = initial_edges[0]
            receives = read.action is not None and read.action.polarity is Polarity.RECEIVE
            tests = any(ref.dotted == ta.trigger for ref in names(read.guard))
            if not (receives or tests):
                problems.append(f"{ta.name}: read edge neither receives nor tests the trigger")
        writes = [edge for edge in ta.edges if edge.tag is EdgeTag.WRITE]
        if not writes:
            problems.append(f"{ta.name}: no write edge")
        for edge in writes:
            if not edge.updates or not _is_deactivation(edge.updates[-1], ta):
                problems.append(f"{ta.name}: write edge does not end by deactivating the trigger")
            targets = [assign.target.dotted for assign in edge.updates]
            for connector in ctx.outgoing(fn.name):
                buffer = ctx.buffer(connector.target)
                expected = sum(
                    1 for c in ctx.outgoing(fn.name) if ctx.buffer(c.target) == buffer
                )
                if targets.count(buffer or "") != expected:
                    problems.append(f"{ta.name}: write edge misses the update for {connector}")
        if fn.trigger.policy is Policy.TIME:
            problems.extend(_time_shape(ta, fn))
    return problems


def _time_shape(ta: TimedAutomaton, fn: AnalysisFunction) -> list[str]:
    period, etime = fn.trigger.period or 0, fn.trigger.execution_time
    problems: list[str] = []
    roles = {loc.role: index for index, loc in enumerate(ta.locations)}
    run, finish = roles.get(ROLE_RUN), roles.get(ROLE_FINISH)
    if run is None or ta.invariant(run) != _clock_le(etime):
        problems.append(f"{ta.name}: Run invariant is not clk <= {etime}")
    if finish is None or ta.invariant(finish) != _clock_le(period - etime):
        problems.append(f"{ta.name}: Finish invariant is not clk <= {period - etime}")
    emit_guard = Compare(CmpOp.GE, _var(CLOCK), Const(period - etime))
    for edge in ta.edges:
        if edge.tag is EdgeTag.WRITE and emit_guard not in conjuncts(edge.guard):
            problems.append(f"{ta.name}: write edge is not guarded by clk >= {period - etime}")
    return problems


__all__ = [
    "OBSERVER_NAME",
    "TransformContext",
    "annex_queries",
    "apply_event_trigger_rule",
    "apply_time_trigger_rule",
    "attach_observer",
    "build_env",
    "build_observer",
    "extend_writes",
    "function_queries",
    "observe_event",
    "refine_run",
    "shape_violations",
    "transform_af_base",
    "transform_faa",
    "transform_function",
    "xwrite",
]
