"""Expression and assignment trees shared by the DSL, the automata and the checker."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Iterator, Mapping

__all__ = [
    "FALSE",
    "TRUE",
    "And",
    "Arith",
    "Assignment",
    "BoolConst",
    "CmpOp",
    "Compare",
    "Const",
    "Deadlock",
    "Expr",
    "Imply",
    "Name",
    "Neg",
    "Not",
    "Or",
    "conjoin",
    "conjuncts",
    "disjoin",
    "names",
    "rename",
    "to_dsl",
    "to_uppaal",
    "walk",
]


class CmpOp(str, Enum):
    LT = "<"
    LE = "<="
    EQ = "=="
    NE = "!="
    GE = ">="
    GT = ">"

    def flipped(self) -> CmpOp:
        """Return the operator obtained by swapping both operands."""

        return _FLIP[self]

    def negated(self) -> CmpOp:
        return _NEGATE[self]

    def apply(self, left: int, right: int) -> bool:
        return _APPLY[self](left, right)


_FLIP = {
    CmpOp.LT: CmpOp.GT,
    CmpOp.LE: CmpOp.GE,
    CmpOp.EQ: CmpOp.EQ,
    CmpOp.NE: CmpOp.NE,
    CmpOp.GE: CmpOp.LE,
    CmpOp.GT: CmpOp.LT,
}
_NEGATE = {
    CmpOp.LT: CmpOp.GE,
    CmpOp.LE: CmpOp.GT,
    CmpOp.EQ: CmpOp.NE,
    CmpOp.NE: CmpOp.EQ,
    CmpOp.GE: CmpOp.LT,
    CmpOp.GT: CmpOp.LE,
}
_APPLY: dict[CmpOp, Callable[[int, int], bool]] = {
    CmpOp.LT: lambda a, b: a < b,
    CmpOp.LE: lambda a, b: a <= b,
    CmpOp.EQ: lambda a, b: a == b,
    CmpOp.NE: lambda a, b: a != b,
    CmpOp.GE: lambda a, b: a >= b,
    CmpOp.GT: lambda a, b: a > b,
}


@dataclass(frozen=True, slots=True)
class Const:
    value: int


@dataclass(frozen=True, slots=True)
class BoolConst:
    value: bool


@dataclass(frozen=True, slots=True)
class Name:
    """Identifier, optionally qualified by a process name (``C3.cp``)."""

    parts: tuple[str, ...]

    @classmethod
    def of(cls, dotted: str) -> Name:
        return cls(tuple(dotted.split(".")))

    @property
    def dotted(self) -> str:
        return ".".join(self.parts)

    @property
    def qualifier(self) -> str | None:
        return self.parts[0] if len(self.parts) > 1 else None

    @property
    def base(self) -> str:
        return self.parts[-1]


@dataclass(frozen=True, slots=True)
class Deadlock:
    """The ``deadlock`` keyword, only meaningful inside ``A[] not deadlock``."""


@dataclass(frozen=True, slots=True)
class Arith:
    op: str  # one of "+", "-", "*"
    left: Expr
    right: Expr


@dataclass(frozen=True, slots=True)
class Neg:
    operand: Expr


@dataclass(frozen=True, slots=True)
class Compare:
    op: CmpOp
    left: Expr
    right: Expr


@dataclass(frozen=True, slots=True)
class Not:
    operand: Expr


@dataclass(frozen=True, slots=True)
class And:
    left: Expr
    right: Expr


@dataclass(frozen=True, slots=True)
class Or:
    left: Expr
    right: Expr


@dataclass(frozen=True, slots=True)
class Imply:
    left: Expr
    right: Expr


Expr = Const | BoolConst | Name | Deadlock | Arith | Neg | Compare | Not | And | Or | Imply

TRUE = BoolConst(True)
FALSE = BoolConst(False)


@dataclass(frozen=True, slots=True)
class Assignment:
    target: Name
    value: Expr

    def __str__(self) -> str:
        return f"{self.target.dotted} := {to_dsl(self.value)}"


def walk(expr: Expr) -> Iterator[Expr]:
    """Yield ``expr`` and every sub-expression, parents first."""

    stack = [expr]
    while stack:
        node = stack.pop()
        yield node
        match node:
            case Arith(_, left, right) | Compare(_, left, right):
                stack.extend((right, left))
            case And(left, right) | Or(left, right) | Imply(left, right):
                stack.extend((right, left))
            case Not(operand) | Neg(operand):
                stack.append(operand)
            case _:
                pass


def names(expr: Expr) -> list[Name]:
    """Return referenced identifiers in first-occurrence order."""

    seen: dict[Name, None] = {}
    for node in walk(expr):
        if isinstance(node, Name):
            seen.setdefault(node, None)
    return list(seen)


def rename(expr: Expr, mapping: Mapping[str, str]) -> Expr:
    """Rewrite unqualified identifiers through ``mapping``; others are kept."""

    match expr:
        case Name(parts) if len(parts) == 1 and parts[0] in mapping:
            return Name.of(mapping[parts[0]])
        case Arith(op, left, right):
            return Arith(op, rename(left, mapping), rename(right, mapping))
        case Compare(op, left, right):
            return Compare(op, rename(left, mapping), rename(right, mapping))
        case And(left, right):
            return And(rename(left, mapping), rename(right, mapping))
        case Or(left, right):
            return Or(rename(left, mapping), rename(right, mapping))
        case Imply(left, right):
            return Imply(rename(left, mapping), rename(right, mapping))
        case Not(operand):
            return Not(rename(operand, mapping))
        case Neg(operand):
            return Neg(rename(operand, mapping))
        case _:
            return expr


def conjuncts(expr: Expr) -> list[Expr]:
    if isinstance(expr, And):
        return conjuncts(expr.left) + conjuncts(expr.right)
    if expr == TRUE:
        return []
    return [expr]


def conjoin(parts: Iterable[Expr]) -> Expr:
    """Left-nested conjunction; the empty conjunction is ``true``."""

    result: Expr | None = None
    for part in parts:
        if part == TRUE:
            continue
        result = part if result is None else And(result, part)
    return TRUE if result is None else result


def disjoin(parts: Iterable[Expr]) -> Expr:
    result: Expr | None = None
    for part in parts:
        result = part if result is None else Or(result, part)
    return FALSE if result is None else result


# Printing. Levels grow with binding strength; the right operand of a
# left-associative operator needs a strictly higher level.
_IMPLY, _OR, _AND, _NOT, _CMP, _SUM, _PRODUCT, _UNARY, _ATOM = range(1, 10)


def _level(expr: Expr) -> int:
    match expr:
        case Imply():
            return _IMPLY
        case Or():
            return _OR
        case And():
            return _AND
        case Not():
            return _NOT
        case Compare():
            return _CMP
        case Arith(op, _, _):
            return _PRODUCT if op == "*" else _SUM
        case Neg():
            return _UNARY
        case _:
            return _ATOM


@dataclass(frozen=True, slots=True)
class _Syntax:
    and_: str
    or_: str
    not_: str
    true: str
    false: str
    not_operand: int


_DSL = _Syntax(and_="and", or_="or", not_="not ", true="true", false="false", not_operand=_NOT)
_UPPAAL = _Syntax(and_="&&", or_="||", not_="!", true="true", false="false", not_operand=_ATOM)


def _render(expr: Expr, syntax: _Syntax) -> str:
    def wrap(child: Expr, minimum: int) -> str:
        text = _render(child, syntax)
        return f"({text})" if _level(child) < minimum else text

    match expr:
        case Const(value):
            return str(value)
        case BoolConst(value):
            return syntax.true if value else syntax.false
        case Name():
            return expr.dotted
        case Deadlock():
            return "deadlock"
        case Neg(operand):
            return f"-{wrap(operand, _UNARY)}"
        case Arith(op, left, right):
            level = _level(expr)
            return f"{wrap(left, level)} {op} {wrap(right, level + 1)}"
        case Compare(op, left, right):
            return f"{wrap(left, _SUM)} {op.value} {wrap(right, _SUM)}"
        case Not(operand):
            return f"{syntax.not_}{wrap(operand, syntax.not_operand)}"
        case And(left, right):
            return f"{wrap(left, _AND)} {syntax.and_} {wrap(right, _NOT)}"
        case Or(left, right):
            return f"{wrap(left, _OR)} {syntax.or_} {wrap(right, _AND)}"
        case Imply(left, right):
            return f"{wrap(left, _OR)} imply {wrap(right, _IMPLY)}"
    raise TypeError(f"not an expression: {expr!r}")  # pragma: no cover - defensive guard


def to_dsl(expr: Expr) -> str:
    """Render ``expr`` in the model/query surface syntax."""

    return _render(expr, _DSL)


def to_uppaal(expr: Expr) -> str:
    """Render ``expr`` in the reference tool's C-like syntax."""

    return _render(expr, _UPPAAL)
