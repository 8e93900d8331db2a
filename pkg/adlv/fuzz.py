"""Seeded random generators for models and small networks."""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass

from .expr import TRUE, Assignment, CmpOp, Compare, Const, Expr, Name, conjoin
from .model import (
    AnalysisFunction,
    AnnexState,
    BehaviorAnnex,
    Condition,
    ConditionKind,
    Connector,
    DataType,
    Direction,
    EnvSpec,
    EnvWrite,
    FaaModel,
    Port,
    PortRef,
    Transition,
    TriggerPolicy,
    VariableDecl,
    validate_model,
)
from .ta import (
    ChannelAction,
    ClockReset,
    Edge,
    Location,
    Network,
    Polarity,
    TimedAutomaton,
    validate_ta,
)
from .transform import shape_violations, transform_faa

logger = logging.getLogger(__name__)

MAX_FUNCTIONS = 4
MAX_CONSTANT = 5
SHARED_VAR = "v"
SYNC_CHANNEL = "go"


def _var(name: str) -> Name:
    return Name((name,))


def _annex(rng: random.Random, fn_ports: list[Port], etime: int, timed: bool) -> BehaviorAnnex:
    inputs = [p for p in fn_ports if p.direction is Direction.IN and not p.is_trigger]
    outputs = [p for p in fn_ports if p.direction is Direction.OUT and not p.data_type.is_bool]
    conditions: list[Condition] = []
    computations: list[Assignment] = []
    if inputs and outputs and rng.random() < 0.4:
        computations.append(Assignment(_var(outputs[0].name), _var(inputs[0].name)))
    if outputs and rng.random() < 0.3:
        port = outputs[0]
        conditions.append(
            Condition(
                ConditionKind.INVARIANT,
                Compare(CmpOp.LE, _var(port.name), Const(port.data_type.hi)),
            )
        )
    states: list[AnnexState] = []
    if rng.random() < 0.5:
        budgets = rng.random() < 0.4
        first = 0 if timed else rng.randint(0, etime)
        finals: list[str] = []
        transitions: list[Transition] = []
        for index in range(rng.randint(1, 3)):
            target = f"S{index}"
            finals.append(target)
            guard: Expr = TRUE
            if inputs and rng.random() < 0.5:
                port = inputs[0]
                guard = Compare(
                    CmpOp.GE, _var(port.name), Const(rng.randint(port.data_type.lo, port.data_type.hi))
                )
            assigns: tuple[Assignment, ...] = ()
            if outputs:
                port = rng.choice(outputs)
                value = rng.randint(port.data_type.lo, port.data_type.hi)
                assigns = (Assignment(_var(port.name), Const(value)),)
            transitions.append(Transition(guard, assigns, target))
        # an unconditional fallback keeps the execution from getting stuck
        transitions.append(Transition(TRUE, (), finals[0]))
        states.append(AnnexState("Start", tuple(transitions), True, first if budgets else None))
        states.extend(
            AnnexState(name, (), False, etime - first if budgets else None) for name in finals
        )
    return BehaviorAnnex(
        parameter_constraints=tuple(conditions),
        state_machine=tuple(states),
        computations=tuple(computations),
    )


def random_model(rng: random.Random, name: str = "Fuzz") -> FaaModel:
    """A small model that passes :func:`validate_model`.

    Functions form a chain: each one may activate the next through a trigger
    connector and pass a data value along.
    """

    count = rng.randint(1, MAX_FUNCTIONS)
    functions: list[AnalysisFunction] = []
    connectors: list[Connector] = []
    data_type = DataType.int_range(0, rng.randint(1, 3))
    for index in range(count):
        fn_name = f"F{index}"
        timed = index == 0 or rng.random() < 0.3
        if timed:
            etime = rng.randint(0, 3)
            trigger = TriggerPolicy.time(etime + rng.randint(1, 6), etime)
        else:
            etime = rng.randint(0, 3)
            trigger = TriggerPolicy.event(etime)
        ports = [
            Port("go", Direction.IN, DataType.boolean(), is_trigger=True),
            Port("x", Direction.IN, data_type),
            Port("y", Direction.OUT, data_type),
            Port("sig", Direction.OUT, DataType.boolean()),
        ]
        functions.append(
            AnalysisFunction(
                fn_name,
                trigger,
                tuple(ports),
                _annex(rng, ports, etime, timed),
                alias=f"C{index}" if rng.random() < 0.3 else None,
            )
        )
        if index > 0:
            previous = f"F{index - 1}"
            if not timed or rng.random() < 0.5:
                connectors.append(Connector(PortRef(previous, "sig"), PortRef(fn_name, "go")))
            if rng.random() < 0.7:
                connectors.append(Connector(PortRef(previous, "y"), PortRef(fn_name, "x")))
    environment = None
    if rng.random() < 0.5:
        writes = [EnvWrite(PortRef("F0", "go"), Const(1), rng.randint(1, 4))]
        if rng.random() < 0.5:
            writes.append(EnvWrite(PortRef("F0", "x"), Const(data_type.hi)))
        environment = EnvSpec("Env", tuple(writes))
    return FaaModel(name, tuple(functions), tuple(connectors), environment=environment)


def random_models(seed: int, count: int) -> list[FaaModel]:
    rng = random.Random(seed)
    return [random_model(rng, f"Fuzz{index}") for index in range(count)]


@dataclass(frozen=True, slots=True)
class FuzzFailure:
    index: int
    model: FaaModel
    problems: tuple[str, ...]


def check_model(model: FaaModel) -> list[str]:
    """Validation, transformation and structural checks for one generated model."""

    problems = [str(d) for d in validate_model(model)]
    if problems:
        return problems
    net = transform_faa(model)
    problems.extend(shape_violations(net, model))
    problems.extend(str(d) for d in validate_ta(net))
    return problems


def fuzz(seed: int, count: int) -> list[FuzzFailure]:
    failures: list[FuzzFailure] = []
    for index, model in enumerate(random_models(seed, count)):
        problems = check_model(model)
        if problems:
            logger.debug("model %d failed: %s", index, problems[0])
            failures.append(FuzzFailure(index, model, tuple(problems)))
    return failures


# Networks for the discrete-time comparison


def _clock_guard(rng: random.Random, clock: str) -> Expr:
    op = rng.choice([CmpOp.LE, CmpOp.GE, CmpOp.EQ])
    return Compare(op, _var(clock), Const(rng.randint(0, MAX_CONSTANT)))


def _random_automaton(rng: random.Random, name: str, role: str) -> TimedAutomaton:
    clock = "x"
    size = rng.randint(2, 3)
    locations = tuple(Location(f"L{i}") for i in range(size))
    invariants: dict[int, Expr] = {}
    for index in range(size):
        if rng.random() < 0.4:
            invariants[index] = Compare(CmpOp.LE, _var(clock), Const(rng.randint(1, MAX_CONSTANT)))
    edges: list[Edge] = []
    for _ in range(rng.randint(2, 4)):
        source, target = rng.randrange(size), rng.randrange(size)
        action: ChannelAction | None = None
        if rng.random() < 0.3:
            action = (
                ChannelAction.emit(SYNC_CHANNEL)
                if role == "sender"
                else ChannelAction.receive(SYNC_CHANNEL)
            )
        parts: list[Expr] = []
        if action is None or action.polarity is Polarity.EMIT:
            if rng.random() < 0.6:
                parts.append(_clock_guard(rng, clock))
        if rng.random() < 0.3:
            parts.append(Compare(CmpOp.EQ, _var(SHARED_VAR), Const(rng.randint(0, 3))))
        updates: tuple[Assignment, ...] = ()
        if rng.random() < 0.4:
            updates = (Assignment(_var(SHARED_VAR), Const(rng.randint(0, 3))),)
        resets = (ClockReset(clock),) if rng.random() < 0.5 else ()
        edges.append(Edge(source, target, conjoin(parts), action, updates, resets))
    return TimedAutomaton(
        name=name,
        locations=locations,
        clocks=(clock,),
        edges=tuple(edges),
        invariants=invariants,
    )


def random_network(rng: random.Random) -> Network:
    """Two automata sharing one bounded variable and one broadcast channel.

    Every clock constraint is non-strict with constants at most ``MAX_CONSTANT``.
    """

    automata = (
        _random_automaton(rng, "P", "sender"),
        _random_automaton(rng, "Q", "receiver"),
    )
    return Network(
        automata,
        (SYNC_CHANNEL,),
        (VariableDecl(SHARED_VAR, DataType.int_range(0, 3), 0),),
    )


__all__ = [
    "FuzzFailure",
    "check_model",
    "fuzz",
    "random_model",
    "random_models",
    "random_network",
]
