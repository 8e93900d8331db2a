"""Analysis-level architecture model and its structural validator."""

from __future__ import annotations

import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from enum import Enum

from .diagnostics import Diagnostic, Rule, Severity
from .errors import SourceSpan
from .expr import Assignment, Expr, names

logger = logging.getLogger(__name__)

DEFAULT_RANGE = (0, 255)


class Direction(str, Enum):
    IN = "in"
    OUT = "out"


class PortKind(str, Enum):
    FLOW = "flow"
    CLIENT_SERVER = "client-server"


class Policy(str, Enum):
    TIME = "time"
    EVENT = "event"


class ConditionKind(str, Enum):
    PRE = "pre"
    POST = "post"
    INVARIANT = "invariant"


@dataclass(frozen=True, slots=True)
class DataType:
    """Bounded integer range; booleans are the range 0..1 flagged as such."""

    lo: int
    hi: int
    is_bool: bool = False

    @classmethod
    def int_range(cls, lo: int, hi: int) -> DataType:
        return cls(lo, hi)

    @classmethod
    def boolean(cls) -> DataType:
        return cls(0, 1, True)

    def contains(self, value: int) -> bool:
        return self.lo <= value <= self.hi

    def __str__(self) -> str:
        return "bool" if self.is_bool else f"int[{self.lo}..{self.hi}]"


BOOL = DataType.boolean()


@dataclass(frozen=True, slots=True)
class VariableDecl:
    name: str
    data_type: DataType
    initial: int = 0
    span: SourceSpan | None = field(default=None, compare=False)


@dataclass(frozen=True, slots=True)
class Port:
    name: str
    direction: Direction
    data_type: DataType
    is_trigger: bool = False
    kind: PortKind = PortKind.FLOW
    span: SourceSpan | None = field(default=None, compare=False)


@dataclass(frozen=True, slots=True)
class PortRef:
    """A ``function.port`` endpoint."""

    function: str
    port: str

    def __str__(self) -> str:
        return f"{self.function}.{self.port}"


@dataclass(frozen=True, slots=True)
class Connector:
    source: PortRef
    target: PortRef
    span: SourceSpan | None = field(default=None, compare=False)

    def __str__(self) -> str:
        return f"{self.source} -> {self.target}"


@dataclass(frozen=True, slots=True)
class TriggerPolicy:
    policy: Policy
    execution_time: int
    period: int | None = None

    @classmethod
    def time(cls, period: int, execution_time: int) -> TriggerPolicy:
        return cls(Policy.TIME, execution_time, period)

    @classmethod
    def event(cls, execution_time: int) -> TriggerPolicy:
        return cls(Policy.EVENT, execution_time)


@dataclass(frozen=True, slots=True)
class Condition:
    kind: ConditionKind
    expr: Expr


@dataclass(frozen=True, slots=True)
class Transition:
    guard: Expr
    assignments: tuple[Assignment, ...]
    target: str


@dataclass(frozen=True, slots=True)
class AnnexState:
    name: str
    transitions: tuple[Transition, ...] = ()
    initial: bool = False
    budget: int | None = None


@dataclass(frozen=True, slots=True)
class BehaviorAnnex:
    parameters: tuple[VariableDecl, ...] = ()
    parameter_constraints: tuple[Condition, ...] = ()
    state_machine: tuple[AnnexState, ...] = ()
    computations: tuple[Assignment, ...] = ()

    @property
    def initial_state(self) -> AnnexState | None:
        return next((state for state in self.state_machine if state.initial), None)

    def conditions(self, kind: ConditionKind) -> list[Expr]:
        return [cond.expr for cond in self.parameter_constraints if cond.kind is kind]


@dataclass(frozen=True, slots=True)
class AnalysisFunction:
    name: str
    trigger: TriggerPolicy
    ports: tuple[Port, ...] = ()
    behavior: BehaviorAnnex = field(default_factory=BehaviorAnnex)
    alias: str | None = None
    span: SourceSpan | None = field(default=None, compare=False)

    @property
    def instance(self) -> str:
        """Process name used for the generated automaton."""

        return self.alias or self.name

    @property
    def inputs(self) -> list[Port]:
        return [port for port in self.ports if port.direction is Direction.IN]

    @property
    def outputs(self) -> list[Port]:
        return [port for port in self.ports if port.direction is Direction.OUT]

    @property
    def trigger_ports(self) -> list[Port]:
        return [port for port in self.ports if port.is_trigger]

    def port(self, name: str) -> Port | None:
        return next((port for port in self.ports if port.name == name), None)


@dataclass(frozen=True, slots=True)
class EnvWrite:
    target: PortRef
    value: Expr
    period: int | None = None


@dataclass(frozen=True, slots=True)
class EnvSpec:
    name: str
    writes: tuple[EnvWrite, ...] = ()


@dataclass(frozen=True, slots=True)
class FaaModel:
    """The functional analysis architecture: functions ``N`` and connectors ``CE``."""

    name: str
    functions: tuple[AnalysisFunction, ...] = ()
    connectors: tuple[Connector, ...] = ()
    globals: tuple[VariableDecl, ...] = ()
    environment: EnvSpec | None = None

    def function(self, name: str) -> AnalysisFunction | None:
        return next((fn for fn in self.functions if fn.name == name), None)

    def resolve(self, ref: PortRef) -> Port | None:
        fn = self.function(ref.function)
        return None if fn is None else fn.port(ref.port)


def _check_decl(decl: VariableDecl, where: str) -> list[Diagnostic]:
    out: list[Diagnostic] = []
    if decl.data_type.lo > decl.data_type.hi:
        out.append(Diagnostic(Rule.EMPTY_RANGE, where, f"range {decl.data_type} is empty"))
    elif not decl.data_type.contains(decl.initial):
        out.append(
            Diagnostic(
                Rule.INITIAL_OUT_OF_RANGE,
                where,
                f"initial value {decl.initial} outside {decl.data_type}",
            )
        )
    return out


def _check_trigger(fn: AnalysisFunction) -> list[Diagnostic]:
    trig = fn.trigger
    out: list[Diagnostic] = []
    if trig.execution_time < 0:
        out.append(Diagnostic(Rule.NEGATIVE_EXEC, fn.name, "execution time is negative"))
    if trig.policy is Policy.TIME:
        if trig.period is None or trig.period <= trig.execution_time:
            out.append(
                Diagnostic(
                    Rule.TIME_PERIOD,
                    fn.name,
                    f"period {trig.period} must exceed execution time {trig.execution_time}",
                )
            )
    elif trig.period is not None:
        out.append(Diagnostic(Rule.EVENT_PERIOD, fn.name, "event trigger cannot carry a period"))
    return out


def _check_ports(fn: AnalysisFunction) -> list[Diagnostic]:
    out: list[Diagnostic] = []
    counts = Counter(port.name for port in fn.ports)
    for port_name, count in counts.items():
        if count > 1:
            out.append(Diagnostic(Rule.DUPLICATE_PORT, f"{fn.name}.{port_name}", "port declared twice"))
    for port in fn.ports:
        where = f"{fn.name}.{port.name}"
        if port.is_trigger and port.direction is not Direction.IN:
            out.append(Diagnostic(Rule.TRIGGER_DIRECTION, where, "trigger ports must be inputs"))
        if port.data_type.lo > port.data_type.hi:
            out.append(Diagnostic(Rule.EMPTY_RANGE, where, f"range {port.data_type} is empty"))
        if port.kind is PortKind.CLIENT_SERVER:
            out.append(
                Diagnostic(
                    Rule.CSPORT_REDUCED,
                    where,
                    "client-server port handled as a flow port",
                    Severity.INFO,
                )
            )
    return out


def _check_annex(fn: AnalysisFunction, global_names: set[str]) -> list[Diagnostic]:
    annex = fn.behavior
    out: list[Diagnostic] = []
    port_names = {port.name for port in fn.ports}
    for param in annex.parameters:
        where = f"{fn.name}.{param.name}"
        if param.name in port_names:
            out.append(Diagnostic(Rule.DUPLICATE_VARIABLE, where, "parameter shadows a port"))
        out.extend(_check_decl(param, where))
    known = port_names | {param.name for param in annex.parameters} | global_names

    def unresolved(expr: Expr, context: str) -> None:
        for ref in names(expr):
            if ref.qualifier is not None or ref.base not in known:
                out.append(
                    Diagnostic(Rule.UNRESOLVED_NAME, f"{fn.name}:{context}", f"unknown name {ref.dotted}")
                )

    def check_assignment(assign: Assignment, context: str) -> None:
        unresolved(assign.target, context)
        unresolved(assign.value, context)

    for cond in annex.parameter_constraints:
        unresolved(cond.expr, cond.kind.value)
    for assign in annex.computations:
        check_assignment(assign, "compute")

    states = {state.name for state in annex.state_machine}
    for state in annex.state_machine:
        for transition in state.transitions:
            unresolved(transition.guard, state.name)
            for assign in transition.assignments:
                check_assignment(assign, state.name)
            if transition.target not in states:
                out.append(
                    Diagnostic(
                        Rule.UNKNOWN_STATE,
                        f"{fn.name}:{state.name}",
                        f"transition targets undeclared state {transition.target}",
                    )
                )
    if annex.state_machine:
        initial = sum(1 for state in annex.state_machine if state.initial)
        if initial != 1:
            out.append(
                Diagnostic(Rule.INITIAL_STATE, fn.name, f"{initial} initial states, expected exactly one")
            )
    return out


def _check_connectors(model: FaaModel) -> list[Diagnostic]:
    out: list[Diagnostic] = []
    for connector in model.connectors:
        where = str(connector)
        ends: list[Port] = []
        for ref in (connector.source, connector.target):
            fn = model.function(ref.function)
            if fn is None:
                out.append(Diagnostic(Rule.UNKNOWN_FUNCTION, where, f"no function {ref.function}"))
                continue
            port = fn.port(ref.port)
            if port is None:
                out.append(Diagnostic(Rule.UNKNOWN_PORT, where, f"no port {ref}"))
                continue
            ends.append(port)
        if len(ends) != 2:
            continue
        source, target = ends
        if source.direction is not Direction.OUT or target.direction is not Direction.IN:
            out.append(
                Diagnostic(
                    Rule.CONNECTOR_DIRECTION,
                    where,
                    f"connects {source.direction.value} to {target.direction.value}, "
                    "expected out to in",
                )
            )
        elif source.data_type != target.data_type:
            out.append(
                Diagnostic(
                    Rule.CONNECTOR_TYPE,
                    where,
                    f"{source.data_type} does not match {target.data_type}",
                )
            )
    return out


def _check_environment(model: FaaModel) -> list[Diagnostic]:
    env = model.environment
    if env is None:
        return []
    out: list[Diagnostic] = []
    for write in env.writes:
        port = model.resolve(write.target)
        if port is None or port.direction is not Direction.IN:
            out.append(
                Diagnostic(Rule.ENV_TARGET, f"{env.name}:{write.target}", "target is not an input port")
            )
        if write.period is not None and write.period <= 0:
            out.append(
                Diagnostic(Rule.ENV_TARGET, f"{env.name}:{write.target}", "period must be positive")
            )
    return out


def incoming_sources(model: FaaModel) -> dict[PortRef, list[str]]:
    """Map each written input port to its writers in declaration order."""

    sources: dict[PortRef, list[str]] = defaultdict(list)
    for connector in model.connectors:
        sources[connector.target].append(str(connector.source))
    if model.environment is not None:
        for index, write in enumerate(model.environment.writes):
            sources[write.target].append(f"{model.environment.name}.w{index}")
    return sources


def _check_fan_in(model: FaaModel) -> list[Diagnostic]:
    out: list[Diagnostic] = []
    sources = incoming_sources(model)
    for fn in model.functions:
        trigger_writers: list[str] = []
        for port in fn.inputs:
            writers = sources.get(PortRef(fn.name, port.name), [])
            if port.is_trigger:
                trigger_writers.extend(writers)
            elif len(writers) > 1:
                out.append(
                    Diagnostic(
                        Rule.FAN_IN,
                        f"{fn.name}.{port.name}",
                        f"{len(writers)} writers; the last write wins",
                        Severity.WARNING,
                    )
                )
        if len(trigger_writers) > 1:
            out.append(
                Diagnostic(
                    Rule.TRIGGER_FAN_IN,
                    fn.name,
                    "trigger ports have several activation sources: " + ", ".join(trigger_writers),
                )
            )
    return out


def validate_model(model: FaaModel) -> list[Diagnostic]:
    """Check ``model`` against the structural rules of the analysis level.

    Returns an empty list when every rule holds. The result depends only on
    ``model`` and is produced in declaration order.
    """

    diagnostics: list[Diagnostic] = []
    global_names = {decl.name for decl in model.globals}
    for decl in model.globals:
        diagnostics.extend(_check_decl(decl, decl.name))

    instance_counts = Counter(name for fn in model.functions for name in {fn.name, fn.instance})
    for name, count in instance_counts.items():
        if count > 1:
            diagnostics.append(Diagnostic(Rule.DUPLICATE_FUNCTION, name, "function name used twice"))

    for fn in model.functions:
        diagnostics.extend(_check_trigger(fn))
        diagnostics.extend(_check_ports(fn))
        diagnostics.extend(_check_annex(fn, global_names))

    diagnostics.extend(_check_connectors(model))
    diagnostics.extend(_check_environment(model))
    diagnostics.extend(_check_fan_in(model))
    if diagnostics:
        logger.debug("model %s: %d diagnostic(s)", model.name, len(diagnostics))
    return diagnostics


__all__ = [
    "BOOL",
    "DEFAULT_RANGE",
    "AnalysisFunction",
    "AnnexState",
    "BehaviorAnnex",
    "Condition",
    "ConditionKind",
    "Connector",
    "DataType",
    "Direction",
    "EnvSpec",
    "EnvWrite",
    "FaaModel",
    "Policy",
    "Port",
    "PortKind",
    "PortRef",
    "TriggerPolicy",
    "Transition",
    "VariableDecl",
    "incoming_sources",
    "validate_model",
]
