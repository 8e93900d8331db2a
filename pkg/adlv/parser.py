"""Lark grammars for the FAA model DSL and the property query language.

Both surfaces share one expression grammar so that guards written in a model
and atoms written in a query file parse identically. The same expression rules
also accept the C-like operators (``&&``, ``||``, ``!``, ``=``) used when a
network is read back from an exported XML file.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from functools import cache
from typing import Any

from lark import Lark, Token, Transformer, v_args
from lark.exceptions import UnexpectedCharacters, UnexpectedEOF, UnexpectedInput, UnexpectedToken

from .errors import ParseError, SourceSpan
from .expr import (
    FALSE,
    TRUE,
    And,
    Arith,
    Assignment,
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
    to_dsl,
)
from .model import (
    AnalysisFunction,
    AnnexState,
    BehaviorAnnex,
    Condition,
    ConditionKind,
    Connector,
    DataType,
    DEFAULT_RANGE,
    Direction,
    EnvSpec,
    EnvWrite,
    FaaModel,
    Policy,
    Port,
    PortKind,
    PortRef,
    Transition,
    TriggerPolicy,
    VariableDecl,
)
from .queries import Query

logger = logging.getLogger(__name__)

GRAMMAR = r"""
start: model
model: "faa" NAME "{" member* "}"

?member: global_decl | function | connector | env

global_decl: "var" NAME ":" type "=" init_value ";"
function: "function" NAME ("as" NAME)? "{" trigger fmember* "}"
trigger: "trigger" "time" "period" INT "exec" INT ";"  -> time_trigger
       | "trigger" "event" "exec" INT ";"               -> event_trigger
?fmember: port | var_decl | annex
var_decl: "var" NAME ":" type "=" init_value ";"
port: direction trigger_mod? cs_mod? "port" NAME ":" type ";"
!direction: "in" | "out"
trigger_mod: "trigger"
!cs_mod: "client" | "server"

type: "bool"                                    -> bool_type
    | "int"                                     -> default_int
    | "int" "[" signed_int ".." signed_int "]"  -> int_type
?init_value: signed_int
           | "true"   -> true_lit
           | "false"  -> false_lit
signed_int: INT        -> pos_int
          | "-" INT    -> neg_int

annex: "annex" "{" annex_item* "}"
?annex_item: condition | state | compute
condition: cond_kind expr ";"
!cond_kind: "pre" | "post" | "invariant"
state: "state" NAME initial_mod? budget? "{" on_clause* "}"
initial_mod: "initial"
budget: "budget" INT
on_clause: "on" expr ("/" assigns)? "->" NAME ";"
compute: "compute" assigns ";"
assigns: assign ("," assign)*
assign: name (":=" | "=") expr

connector: "connect" NAME "." NAME "->" NAME "." NAME ";"
env: "env" NAME "{" env_write* "}"
env_write: "write" NAME "." NAME ":=" expr ("every" INT)? ";"

query: _ABOX expr                              -> q_invariant
     | _EDIAMOND expr                          -> q_reach
     | expr "-->" expr                         -> q_leads_to
     | "response" expr "=>" expr "within" bound -> q_response
bound: INT    -> finite_bound
     | "inf"  -> infinite_bound

expr_only: expr
assigns_only: assigns?

?expr: imply_expr
?imply_expr: or_expr
           | or_expr "imply" imply_expr         -> imply
?or_expr: and_expr
        | or_expr ("or" | "||") and_expr       -> or_
?and_expr: not_expr
         | and_expr ("and" | "&&") not_expr    -> and_
?not_expr: cmp_expr
         | ("not" | "!") not_expr              -> not_
?cmp_expr: sum
         | sum cmp_op sum                      -> compare
!cmp_op: "<=" | ">=" | "==" | "!=" | "<" | ">"
?sum: product
    | sum add_op product                       -> arith
!add_op: "+" | "-"
?product: unary
        | product mul_op unary                 -> arith
!mul_op: "*"
?unary: atom
      | "-" unary                              -> neg
?atom: INT                                     -> int_lit
     | "true"                                  -> true_lit
     | "false"                                 -> false_lit
     | "deadlock"                              -> deadlock
     | name
     | "(" expr ")"
name: NAME ("." NAME)*

_ABOX.2: "A[]"
_EDIAMOND.2: "E<>"
COMMENT: /\/\/[^\n]*/

%import common.CNAME -> NAME
%import common.INT
%import common.WS
%ignore WS
%ignore COMMENT
"""


@cache
def _parser() -> Lark:
    return Lark(
        GRAMMAR,
        start=["start", "query", "expr_only", "assigns_only"],
        parser="lalr",
        propagate_positions=True,
        maybe_placeholders=False,
    )


@dataclass(frozen=True, slots=True)
class _Flag:
    name: str


@dataclass(frozen=True, slots=True)
class _Budget:
    value: int


@dataclass(frozen=True, slots=True)
class _Decl:
    decl: VariableDecl


def _span(source: str, meta: Any) -> SourceSpan | None:
    line = getattr(meta, "line", None)
    if line is None:
        return None
    return SourceSpan(source, line, getattr(meta, "column", 1))


class _Builder(Transformer):
    """Turns parse trees into model, query and expression values."""

    def __init__(self, source: str) -> None:
        super().__init__()
        self.source = source

    # expressions
    def int_lit(self, children: list[Token]) -> Const:
        return Const(int(children[0]))

    def true_lit(self, _children: list[Any]) -> Expr:
        return TRUE

    def false_lit(self, _children: list[Any]) -> Expr:
        return FALSE

    def deadlock(self, _children: list[Any]) -> Expr:
        return Deadlock()

    def name(self, children: list[Token]) -> Name:
        return Name(tuple(str(token) for token in children))

    def neg(self, children: list[Expr]) -> Expr:
        (operand,) = children
        if isinstance(operand, Const):
            return Const(-operand.value)
        return Neg(operand)

    def cmp_op(self, children: list[Token]) -> CmpOp:
        return CmpOp(str(children[0]))

    def add_op(self, children: list[Token]) -> str:
        return str(children[0])

    mul_op = add_op

    def arith(self, children: list[Any]) -> Expr:
        left, op, right = children
        return Arith(op, left, right)

    def compare(self, children: list[Any]) -> Expr:
        left, op, right = children
        return Compare(op, left, right)

    def not_(self, children: list[Expr]) -> Expr:
        return Not(children[0])

    def and_(self, children: list[Expr]) -> Expr:
        return And(children[0], children[1])

    def or_(self, children: list[Expr]) -> Expr:
        return Or(children[0], children[1])

    def imply(self, children: list[Expr]) -> Expr:
        return Imply(children[0], children[1])

    def expr_only(self, children: list[Expr]) -> Expr:
        return children[0]

    def assign(self, children: list[Any]) -> Assignment:
        return Assignment(children[0], children[1])

    def assigns(self, children: list[Assignment]) -> tuple[Assignment, ...]:
        return tuple(children)

    def assigns_only(self, children: list[tuple[Assignment, ...]]) -> tuple[Assignment, ...]:
        return children[0] if children else ()

    # types and declarations
    def pos_int(self, children: list[Token]) -> int:
        return int(children[0])

    def neg_int(self, children: list[Token]) -> int:
        return -int(children[0])

    def bool_type(self, _children: list[Any]) -> DataType:
        return DataType.boolean()

    def default_int(self, _children: list[Any]) -> DataType:
        return DataType.int_range(*DEFAULT_RANGE)

    def int_type(self, children: list[int]) -> DataType:
        return DataType.int_range(children[0], children[1])

    def _decl(self, meta: Any, children: list[Any]) -> VariableDecl:
        name, data_type, initial = children
        value = int(initial.value) if isinstance(initial, BoolConst) else int(initial)
        return VariableDecl(str(name), data_type, value, _span(self.source, meta))

    @v_args(meta=True)
    def global_decl(self, meta: Any, children: list[Any]) -> VariableDecl:
        return self._decl(meta, children)

    @v_args(meta=True)
    def var_decl(self, meta: Any, children: list[Any]) -> _Decl:
        return _Decl(self._decl(meta, children))

    # functions
    def time_trigger(self, children: list[Token]) -> TriggerPolicy:
        return TriggerPolicy.time(int(children[0]), int(children[1]))

    def event_trigger(self, children: list[Token]) -> TriggerPolicy:
        return TriggerPolicy.event(int(children[0]))

    def direction(self, children: list[Token]) -> Direction:
        return Direction(str(children[0]))

    def trigger_mod(self, _children: list[Any]) -> _Flag:
        return _Flag("trigger")

    def cs_mod(self, _children: list[Any]) -> _Flag:
        return _Flag("client-server")

    @v_args(meta=True)
    def port(self, meta: Any, children: list[Any]) -> Port:
        direction = children[0]
        flags = {child.name for child in children if isinstance(child, _Flag)}
        name = next(child for child in children if isinstance(child, Token))
        data_type = children[-1]
        return Port(
            name=str(name),
            direction=direction,
            data_type=data_type,
            is_trigger="trigger" in flags,
            kind=PortKind.CLIENT_SERVER if "client-server" in flags else PortKind.FLOW,
            span=_span(self.source, meta),
        )

    def cond_kind(self, children: list[Token]) -> ConditionKind:
        return ConditionKind(str(children[0]))

    def condition(self, children: list[Any]) -> Condition:
        return Condition(children[0], children[1])

    def initial_mod(self, _children: list[Any]) -> _Flag:
        return _Flag("initial")

    def budget(self, children: list[Token]) -> _Budget:
        return _Budget(int(children[0]))

    def on_clause(self, children: list[Any]) -> Transition:
        guard = children[0]
        assigns: tuple[Assignment, ...] = children[1] if len(children) == 3 else ()
        return Transition(guard, assigns, str(children[-1]))

    def state(self, children: list[Any]) -> AnnexState:
        initial = any(isinstance(child, _Flag) for child in children)
        budget = next((child.value for child in children if isinstance(child, _Budget)), None)
        transitions = tuple(child for child in children if isinstance(child, Transition))
        return AnnexState(str(children[0]), transitions, initial, budget)

    def compute(self, children: list[tuple[Assignment, ...]]) -> tuple[Assignment, ...]:
        return children[0]

    def annex(self, children: list[Any]) -> BehaviorAnnex:
        conditions = tuple(child for child in children if isinstance(child, Condition))
        states = tuple(child for child in children if isinstance(child, AnnexState))
        computations = tuple(
            assign for child in children if isinstance(child, tuple) for assign in child
        )
        return BehaviorAnnex(
            parameter_constraints=conditions, state_machine=states, computations=computations
        )

    @v_args(meta=True)
    def function(self, meta: Any, children: list[Any]) -> AnalysisFunction:
        tokens = [child for child in children if isinstance(child, Token)]
        trigger = next(child for child in children if isinstance(child, TriggerPolicy))
        ports = tuple(child for child in children if isinstance(child, Port))
        params = tuple(child.decl for child in children if isinstance(child, _Decl))
        annexes = [child for child in children if isinstance(child, BehaviorAnnex)]
        annex = BehaviorAnnex(
            parameters=params,
            parameter_constraints=tuple(c for a in annexes for c in a.parameter_constraints),
            state_machine=tuple(s for a in annexes for s in a.state_machine),
            computations=tuple(c for a in annexes for c in a.computations),
        )
        return AnalysisFunction(
            name=str(tokens[0]),
            trigger=trigger,
            ports=ports,
            behavior=annex,
            alias=str(tokens[1]) if len(tokens) > 1 else None,
            span=_span(self.source, meta),
        )

    @v_args(meta=True)
    def connector(self, meta: Any, children: list[Token]) -> Connector:
        src_fn, src_port, dst_fn, dst_port = (str(token) for token in children)
        return Connector(
            PortRef(src_fn, src_port), PortRef(dst_fn, dst_port), _span(self.source, meta)
        )

    def env_write(self, children: list[Any]) -> EnvWrite:
        period = int(children[3]) if len(children) == 4 else None
        return EnvWrite(PortRef(str(children[0]), str(children[1])), children[2], period)

    def env(self, children: list[Any]) -> EnvSpec:
        return EnvSpec(str(children[0]), tuple(children[1:]))

    def model(self, children: list[Any]) -> FaaModel:
        env = [child for child in children if isinstance(child, EnvSpec)]
        return FaaModel(
            name=str(children[0]),
            functions=tuple(child for child in children if isinstance(child, AnalysisFunction)),
            connectors=tuple(child for child in children if isinstance(child, Connector)),
            globals=tuple(child for child in children if isinstance(child, VariableDecl)),
            environment=env[-1] if env else None,
        )

    def start(self, children: list[FaaModel]) -> FaaModel:
        return children[0]

    # queries
    def q_invariant(self, children: list[Expr]) -> Query:
        (expr,) = children
        if expr == Not(Deadlock()):
            return Query.deadlock_free()
        return Query.invariant(expr)

    def q_reach(self, children: list[Expr]) -> Query:
        return Query.reach(children[0])

    def q_leads_to(self, children: list[Expr]) -> Query:
        return Query.leads_to(children[0], children[1])

    def finite_bound(self, children: list[Token]) -> int:
        return int(children[0])

    def infinite_bound(self, _children: list[Any]) -> None:
        return None

    def q_response(self, children: list[Any]) -> Query:
        return Query.bounded_response(children[0], children[1], children[2])


def _describe_expected(parser: Lark, expected: set[str] | frozenset[str]) -> list[str]:
    described: list[str] = []
    for terminal in sorted(expected):
        try:
            pattern = parser.get_terminal(terminal).pattern
        except KeyError:
            described.append(terminal)
            continue
        described.append(pattern.value if pattern.type == "str" else terminal)
    return described


def _parse_error(exc: UnexpectedInput, text: str, source: str, line_offset: int = 0) -> ParseError:
    parser = _parser()
    line, column = exc.line, exc.column
    if line is None or line < 1:
        lines = text.splitlines() or [""]
        line, column = len(lines), len(lines[-1]) + 1
    found = "end of input"
    expected: list[str] = []
    if isinstance(exc, UnexpectedToken):
        if exc.token.type != "$END":
            found = str(exc.token)
        expected = _describe_expected(parser, exc.expected)
    elif isinstance(exc, UnexpectedCharacters):
        found = exc.char
        expected = _describe_expected(parser, exc.allowed or set())
    elif isinstance(exc, UnexpectedEOF):
        expected = _describe_expected(parser, set(exc.expected))
    return ParseError(SourceSpan(source, line + line_offset, column), expected, found)


def parse_model(text: str, source: str = "<model>") -> FaaModel:
    """Parse one ``faa`` block.

    Raises ``ParseError`` at the first syntax error. Name resolution is left
    to ``validate_model``.
    """

    try:
        tree = _parser().parse(text, start="start")
    except UnexpectedInput as exc:
        raise _parse_error(exc, text, source) from None
    model: FaaModel = _Builder(source).transform(tree)
    logger.debug("parsed model %s with %d function(s)", model.name, len(model.functions))
    return model


def parse_queries(text: str, source: str = "<queries>") -> list[Query]:
    """Parse a query file: one query per line, ``//`` comments label the next query."""

    queries: list[Query] = []
    pending_label: str | None = None
    for number, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped:
            continue
        if stripped.startswith("//"):
            pending_label = stripped[2:].strip() or pending_label
            continue
        try:
            tree = _parser().parse(raw, start="query")
        except UnexpectedInput as exc:
            raise _parse_error(exc, raw, source, line_offset=number - 1) from None
        query: Query = _Builder(source).transform(tree)
        queries.append(
            replace(query, label=pending_label or f"line {number}", span=SourceSpan(source, number, 1))
        )
        pending_label = None
    return queries


def parse_expr(text: str, source: str = "<expr>") -> Expr:
    try:
        tree = _parser().parse(text, start="expr_only")
    except UnexpectedInput as exc:
        raise _parse_error(exc, text, source) from None
    expr: Expr = _Builder(source).transform(tree)
    return expr


def parse_assignments(text: str, source: str = "<updates>") -> tuple[Assignment, ...]:
    """Parse a comma separated update list; ``x = e`` and ``x := e`` are both accepted."""

    try:
        tree = _parser().parse(text, start="assigns_only")
    except UnexpectedInput as exc:
        raise _parse_error(exc, text, source) from None
    assigns: tuple[Assignment, ...] = _Builder(source).transform(tree)
    return assigns


# Pretty printing back into the DSL.


def _decl_text(keyword: str, decl: VariableDecl) -> str:
    initial = ("true" if decl.initial else "false") if decl.data_type.is_bool else decl.initial
    return f"{keyword} {decl.name}: {decl.data_type} = {initial};"


def _assigns_text(assigns: tuple[Assignment, ...]) -> str:
    return ", ".join(f"{a.target.dotted} := {to_dsl(a.value)}" for a in assigns)


def _function_text(fn: AnalysisFunction) -> list[str]:
    alias = f" as {fn.alias}" if fn.alias else ""
    lines = [f"  function {fn.name}{alias} {{"]
    trig = fn.trigger
    if trig.policy is Policy.TIME:
        lines.append(f"    trigger time period {trig.period} exec {trig.execution_time};")
    else:
        lines.append(f"    trigger event exec {trig.execution_time};")
    for port in fn.ports:
        mods = " trigger" if port.is_trigger else ""
        if port.kind is PortKind.CLIENT_SERVER:
            mods += " server"
        lines.append(f"    {port.direction.value}{mods} port {port.name}: {port.data_type};")
    for param in fn.behavior.parameters:
        lines.append(f"    {_decl_text('var', param)}")
    annex = fn.behavior
    if annex.parameter_constraints or annex.state_machine or annex.computations:
        lines.append("    annex {")
        for cond in annex.parameter_constraints:
            lines.append(f"      {cond.kind.value} {to_dsl(cond.expr)};")
        if annex.computations:
            lines.append(f"      compute {_assigns_text(annex.computations)};")
        for state in annex.state_machine:
            head = f"      state {state.name}"
            if state.initial:
                head += " initial"
            if state.budget is not None:
                head += f" budget {state.budget}"
            lines.append(head + " {")
            for tr in state.transitions:
                action = f" / {_assigns_text(tr.assignments)}" if tr.assignments else ""
                lines.append(f"        on {to_dsl(tr.guard)}{action} -> {tr.target};")
            lines.append("      }")
        lines.append("    }")
    lines.append("  }")
    return lines


def print_model(model: FaaModel) -> str:
    """Render ``model`` so that ``parse_model`` yields an equal value."""

    lines = [f"faa {model.name} {{"]
    lines.extend(f"  {_decl_text('var', decl)}" for decl in model.globals)
    for fn in model.functions:
        lines.extend(_function_text(fn))
    lines.extend(
        f"  connect {c.source.function}.{c.source.port} -> {c.target.function}.{c.target.port};"
        for c in model.connectors
    )
    if model.environment is not None:
        env = model.environment
        lines.append(f"  env {env.name} {{")
        for write in env.writes:
            every = f" every {write.period}" if write.period is not None else ""
            lines.append(f"    write {write.target} := {to_dsl(write.value)}{every};")
        lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"


__all__ = [
    "GRAMMAR",
    "parse_assignments",
    "parse_expr",
    "parse_model",
    "parse_queries",
    "print_model",
]
