"""Difference bound matrices over integer clock constants.

Entry ``[i][j]`` bounds ``x_i - x_j``; clock 0 is the constant reference.
Bounds are packed into one int64 as ``2 * value + (0 if strict else 1)`` so
that integer order matches bound order and ``(v, <)`` sorts before
``(v, <=)``. Closure, tightening and extrapolation run as numba kernels on
private copies; a ``Dbm`` handed out is never mutated again.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
from numba import njit

from .expr import CmpOp

INF = 1 << 60
LE_ZERO = 1


def encode(value: int, strict: bool) -> int:
    return 2 * value + (0 if strict else 1)


@njit(cache=True)
def _add(a: int, b: int) -> int:
    if a >= INF or b >= INF:
        return INF
    return a + b - ((a | b) & 1)


@njit(cache=True)
def _close(m: np.ndarray) -> bool:
    n = m.shape[0]
    for k in range(n):
        for i in range(n):
            mik = m[i, k]
            if mik >= INF:
                continue
            for j in range(n):
                cand = _add(mik, m[k, j])
                if cand < m[i, j]:
                    m[i, j] = cand
        if m[k, k] < LE_ZERO:
            return False
    for i in range(n):
        if m[i, i] < LE_ZERO:
            return False
    return True


@njit(cache=True)
def _tighten(m: np.ndarray, i: int, j: int, raw: int) -> bool:
    if _add(m[j, i], raw) < LE_ZERO:
        return False
    if raw >= m[i, j]:
        return True
    m[i, j] = raw
    n = m.shape[0]
    for k in range(n):
        via = _add(m[k, i], raw)
        if via >= INF:
            continue
        for l in range(n):
            cand = _add(via, m[j, l])
            if cand < m[k, l]:
                m[k, l] = cand
    return True


@njit(cache=True)
def _reset(m: np.ndarray, x: int, value: int) -> None:
    n = m.shape[0]
    upper = 2 * value + 1
    lower = -2 * value + 1
    for j in range(n):
        m[x, j] = _add(upper, m[0, j])
        m[j, x] = _add(m[j, 0], lower)
    m[x, x] = LE_ZERO


@njit(cache=True)
def _extrapolate(m: np.ndarray, maxc: np.ndarray) -> None:
    n = m.shape[0]
    for i in range(n):
        for j in range(n):
            if i == j or m[i, j] >= INF:
                continue
            if m[i, j] > 2 * maxc[i] + 1:
                m[i, j] = INF
            elif m[i, j] < -2 * maxc[j]:
                m[i, j] = -2 * maxc[j]
    _close(m)


@njit(cache=True)
def _includes(a: np.ndarray, b: np.ndarray) -> bool:
    n = a.shape[0]
    for i in range(n):
        for j in range(n):
            if b[i, j] > a[i, j]:
                return False
    return True


@njit(cache=True)
def _free(m: np.ndarray, x: int) -> None:
    n = m.shape[0]
    for j in range(n):
        m[x, j] = INF
        m[j, x] = m[j, 0]
    m[x, x] = LE_ZERO


@njit(cache=True)
def _first_including(stack: np.ndarray, count: int, b: np.ndarray) -> int:
    n = b.shape[0]
    for k in range(count):
        inside = True
        for i in range(n):
            for j in range(n):
                if b[i, j] > stack[k, i, j]:
                    inside = False
                    break
            if not inside:
                break
        if inside:
            return k
    return -1


@njit(cache=True)
def _included_in(stack: np.ndarray, count: int, a: np.ndarray, out: np.ndarray) -> int:
    n = a.shape[0]
    hits = 0
    for k in range(count):
        inside = True
        for i in range(n):
            for j in range(n):
                if stack[k, i, j] > a[i, j]:
                    inside = False
                    break
            if not inside:
                break
        out[k] = inside
        if inside:
            hits += 1
    return hits


@dataclass(frozen=True, slots=True)
class Bound:
    """``value`` with ``None`` for +infinity; ``strict`` selects ``<`` over ``<=``."""

    value: int | None
    strict: bool = False

    @classmethod
    def le(cls, value: int) -> Bound:
        return cls(value, False)

    @classmethod
    def lt(cls, value: int) -> Bound:
        return cls(value, True)

    @classmethod
    def from_raw(cls, raw: int) -> Bound:
        if raw >= INF:
            return INFINITY
        return cls(raw >> 1, (raw & 1) == 0)

    @property
    def raw(self) -> int:
        return INF if self.value is None else encode(self.value, self.strict)

    @property
    def is_infinite(self) -> bool:
        return self.value is None

    def __add__(self, other: Bound) -> Bound:
        return Bound.from_raw(_add(self.raw, other.raw))

    def __lt__(self, other: Bound) -> bool:
        return self.raw < other.raw

    def __le__(self, other: Bound) -> bool:
        return self.raw <= other.raw

    def __gt__(self, other: Bound) -> bool:
        return self.raw > other.raw

    def __ge__(self, other: Bound) -> bool:
        return self.raw >= other.raw

    def __str__(self) -> str:
        if self.value is None:
            return "<inf"
        return f"{'<' if self.strict else '<='}{self.value}"


INFINITY = Bound(None, True)


@dataclass(frozen=True, slots=True)
class Constraint:
    """``x_i - x_j`` bounded by ``bound``."""

    i: int
    j: int
    bound: Bound


def clock_constraints(clock: int, op: CmpOp, value: int) -> tuple[Constraint, ...]:
    """Translate ``x op value`` for clock index ``clock`` (1-based) into DBM entries."""

    match op:
        case CmpOp.LE:
            return (Constraint(clock, 0, Bound.le(value)),)
        case CmpOp.LT:
            return (Constraint(clock, 0, Bound.lt(value)),)
        case CmpOp.GE:
            return (Constraint(0, clock, Bound.le(-value)),)
        case CmpOp.GT:
            return (Constraint(0, clock, Bound.lt(-value)),)
        case CmpOp.EQ:
            return (Constraint(clock, 0, Bound.le(value)), Constraint(0, clock, Bound.le(-value)))
    raise ValueError(f"{op.value} is not a convex clock constraint")


class Dbm:
    """An immutable zone. ``EMPTY`` is the only empty zone value."""

    __slots__ = ("matrix",)

    matrix: np.ndarray

    def __init__(self, matrix: np.ndarray) -> None:
        frozen = np.array(matrix, dtype=np.int64, copy=True)
        frozen.setflags(write=False)
        object.__setattr__(self, "matrix", frozen)

    @classmethod
    def from_bounds(cls, rows: Sequence[Sequence[Bound]]) -> Dbm:
        """Build a matrix entry by entry without closing it."""

        return cls(np.array([[b.raw for b in row] for row in rows], dtype=np.int64))

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def clocks(self) -> int:
        return max(self.dim - 1, 0)

    def is_empty(self) -> bool:
        return self.matrix.size == 0

    def bound(self, i: int, j: int) -> Bound:
        return Bound.from_raw(int(self.matrix[i, j]))

    def upper(self, clock: int) -> Bound:
        return self.bound(clock, 0)

    def lower(self, clock: int) -> Bound:
        """Return the bound on ``-x``; ``(-3, <=)`` reads as ``x >= 3``."""

        return self.bound(0, clock)

    def _work(self) -> np.ndarray:
        return np.array(self.matrix, dtype=np.int64, copy=True)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dbm):
            return NotImplemented
        return self.matrix.shape == other.matrix.shape and bool(
            np.array_equal(self.matrix, other.matrix)
        )

    def __hash__(self) -> int:
        return hash((self.matrix.shape, self.matrix.tobytes()))

    def __repr__(self) -> str:
        if self.is_empty():
            return "Dbm(EMPTY)"
        return f"Dbm({self.matrix.tolist()!r})"

    def describe(self, clock_names: Sequence[str]) -> list[str]:
        """Per-clock interval text such as ``0<=clk<=2`` or ``clk>3``."""

        if self.is_empty():
            return ["empty"]
        parts: list[str] = []
        for index, name in enumerate(clock_names, start=1):
            low = self.lower(index)
            high = self.upper(index)
            assert low.value is not None
            text = f"{-low.value}{'<' if low.strict else '<='}{name}"
            if high.value is not None:
                text += f"{'<' if high.strict else '<='}{high.value}"
            parts.append(text)
        return parts


EMPTY = Dbm(np.zeros((0, 0), dtype=np.int64))


def dbm_init(n: int) -> Dbm:
    """Zone where all ``n`` clocks equal zero."""

    if n < 0:
        raise ValueError("clock count must be nonnegative")
    return Dbm(np.full((n + 1, n + 1), LE_ZERO, dtype=np.int64))


def canonicalize(d: Dbm) -> Dbm:
    if d.is_empty():
        return EMPTY
    work = d._work()
    return Dbm(work) if _close(work) else EMPTY


def up(d: Dbm) -> Dbm:
    if d.is_empty():
        return EMPTY
    work = d._work()
    work[1:, 0] = INF
    return Dbm(work)


def constrain(d: Dbm, constraints: Constraint | Iterable[Constraint]) -> Dbm:
    """Intersect with one or more difference constraints, keeping the result closed."""

    if d.is_empty():
        return EMPTY
    items = (constraints,) if isinstance(constraints, Constraint) else tuple(constraints)
    if not items:
        return d
    work = d._work()
    for item in items:
        if not _tighten(work, item.i, item.j, item.bound.raw):
            return EMPTY
    return Dbm(work)


def reset(d: Dbm, x: int, c: int = 0) -> Dbm:
    if d.is_empty():
        return EMPTY
    if c < 0:
        raise ValueError("clocks can only be reset to nonnegative values")
    work = d._work()
    _reset(work, x, c)
    return Dbm(work)


def includes(a: Dbm, b: Dbm) -> bool:
    """True iff every valuation of ``b`` lies in ``a``."""

    if b.is_empty():
        return True
    if a.is_empty() or a.dim != b.dim:
        return False
    return bool(_includes(a.matrix, b.matrix))


def extrapolate(d: Dbm, maxc: Mapping[int, int] | Sequence[int] | np.ndarray) -> Dbm:
    """Max-constant widening; ``maxc`` maps clock index (1-based) to its constant."""

    if d.is_empty():
        return EMPTY
    constants = np.zeros(d.dim, dtype=np.int64)
    if isinstance(maxc, Mapping):
        for clock, value in maxc.items():
            constants[clock] = value
    else:
        constants[1 : len(maxc) + 1] = np.asarray(maxc, dtype=np.int64)
    constants[0] = 0
    work = d._work()
    _extrapolate(work, constants)
    return Dbm(work)


def intersects(d: Dbm, constraints: Iterable[Constraint]) -> bool:
    return not constrain(d, constraints).is_empty()


def free(d: Dbm, *clocks: int) -> Dbm:
    """Drop every constraint on the given clocks except ``x >= 0``."""

    if d.is_empty() or not clocks:
        return d
    work = d._work()
    for x in clocks:
        _free(work, x)
    return Dbm(work)


def first_including(stack: np.ndarray, count: int, d: Dbm) -> int:
    """Position of the first of ``stack[:count]`` that includes ``d``, or -1."""

    return int(_first_including(stack, count, d.matrix))


def included_in(stack: np.ndarray, count: int, d: Dbm) -> np.ndarray:
    """Mask over ``stack[:count]`` of the matrices that ``d`` includes."""

    out = np.zeros(count, dtype=np.bool_)
    _included_in(stack, count, d.matrix, out)
    return out


__all__ = [
    "EMPTY",
    "INF",
    "INFINITY",
    "LE_ZERO",
    "Bound",
    "Constraint",
    "Dbm",
    "canonicalize",
    "clock_constraints",
    "constrain",
    "dbm_init",
    "encode",
    "extrapolate",
    "first_including",
    "free",
    "included_in",
    "includes",
    "intersects",
    "reset",
    "up",
]
