from __future__ import annotations

import pytest

from adlv.diagnostics import Rule
from adlv.model import DataType, VariableDecl
from adlv.parser import parse_assignments, parse_expr
from adlv.ta import (
    ChannelAction,
    ClockReset,
    Edge,
    Location,
    LocationKind,
    Network,
    TimedAutomaton,
    dump_ta,
    live_clocks,
    max_clock_constants,
    split_guard,
    validate_ta,
)


def _automaton(**overrides) -> TimedAutomaton:
    fields = dict(
        name="P",
        locations=(Location("A"), Location("B", LocationKind.COMMITTED)),
        clocks=("x",),
        data_vars=(VariableDecl("n", DataType.int_range(0, 3), 0),),
        edges=(
            Edge(
                0,
                1,
                parse_expr("x >= 2 && n < 3"),
                ChannelAction.emit("go"),
                parse_assignments("n := n + 1"),
                (ClockReset("x"),),
            ),
        ),
        invariants={0: parse_expr("x <= 4")},
    )
    fields.update(overrides)
    return TimedAutomaton(**fields)


def _rules(ta: TimedAutomaton, channels: tuple[str, ...] = ("go",)) -> list[Rule]:
    return [d.rule for d in validate_ta(Network((ta,), channels))]


def test_well_formed_automaton() -> None:
    assert _rules(_automaton()) == []


def test_bad_endpoints_and_initial() -> None:
    assert Rule.BAD_INITIAL in _rules(_automaton(initial=5))
    assert Rule.BAD_EDGE_ENDPOINT in _rules(_automaton(edges=(Edge(0, 7),)))


def test_undeclared_channel() -> None:
    assert _rules(_automaton(), channels=()) == [Rule.UNDECLARED_CHANNEL]


def test_invariants_must_be_upper_bounds() -> None:
    assert _rules(_automaton(invariants={0: parse_expr("x >= 1")})) == [Rule.INVARIANT_NOT_UPPER]


def test_receivers_cannot_test_clocks() -> None:
    edge = Edge(0, 1, parse_expr("x >= 1"), ChannelAction.receive("go"))
    assert _rules(_automaton(edges=(edge,))) == [Rule.RECEIVER_CLOCK_GUARD]


def test_clock_misuse_in_guards_and_updates() -> None:
    assert Rule.CLOCK_GUARD_FORM in _rules(_automaton(edges=(Edge(0, 1, parse_expr("x + 1 >= 2")),)))
    update = Edge(0, 1, updates=parse_assignments("n := x"))
    assert Rule.CLOCK_GUARD_FORM in _rules(_automaton(edges=(update,)))


def test_unknown_names_and_resets() -> None:
    assert Rule.UNKNOWN_VARIABLE in _rules(_automaton(edges=(Edge(0, 1, parse_expr("m == 1")),)))
    assert Rule.UNKNOWN_VARIABLE in _rules(
        _automaton(edges=(Edge(0, 1, updates=parse_assignments("m := 1")),))
    )
    assert Rule.BAD_RESET in _rules(_automaton(edges=(Edge(0, 1, resets=(ClockReset("y"),)),)))


def test_duplicates_and_shadowing() -> None:
    ta = _automaton(locations=(Location("A"), Location("A")))
    assert Rule.DUPLICATE_LOCATION in _rules(ta)
    assert Rule.DUPLICATE_CLOCK in _rules(_automaton(clocks=("x", "x")))
    net = Network((_automaton(), _automaton()), ("go",), (VariableDecl("n", DataType.int_range(0, 1), 0),))
    rules = [d.rule for d in validate_ta(net)]
    assert Rule.DUPLICATE_AUTOMATON in rules
    assert Rule.SHADOWED_GLOBAL in rules


def test_split_guard_separates_clock_atoms() -> None:
    data, atoms = split_guard(parse_expr("x >= 2 && n < 3 && 4 >= x"), ("x",))
    assert data == parse_expr("n < 3")
    assert [(a.clock, a.op.value, a.value) for a in atoms] == [("x", ">=", 2), ("x", "<=", 4)]
    with pytest.raises(ValueError):
        split_guard(parse_expr("x > 1 || n == 0"), ("x",))


def test_max_clock_constants() -> None:
    ta = _automaton(edges=(Edge(0, 1, parse_expr("x >= 7"), resets=(ClockReset("x", 9),)),))
    assert max_clock_constants(Network((ta,), ("go",))) == {"P.x": 9}
    assert max_clock_constants(Network((_automaton(),), ("go",))) == {"P.x": 4}


def test_live_clocks_stop_at_resets() -> None:
    ta = TimedAutomaton(
        name="A",
        locations=(Location("L0"), Location("L1"), Location("L2"), Location("L3")),
        clocks=("x", "y"),
        edges=(
            Edge(0, 1, parse_expr("y >= 5"), resets=(ClockReset("y"),)),
            Edge(1, 2, parse_expr("x >= 2")),
            Edge(2, 3, resets=(ClockReset("x"), ClockReset("y"))),
            Edge(3, 2),
        ),
        invariants={3: parse_expr("y <= 1")},
    )
    assert live_clocks(ta) == (
        frozenset({"x", "y"}),
        frozenset({"x"}),
        frozenset(),
        frozenset({"y"}),
    )


def test_dump_format() -> None:
    net = Network((_automaton(),), ("go",), (VariableDecl("g", DataType.boolean(), 1),))
    assert dump_ta(net) == (
        "network\n"
        "  broadcast chan go\n"
        "  var g: bool = 1\n"
        "\n"
        "automaton P\n"
        "  clock x\n"
        "  var n: int[0..3] = 0\n"
        "  location A initial inv x <= 4\n"
        "  location B committed\n"
        "  edge A -- [x >= 2 and n < 3] go! / n := n + 1, x := 0 --> B\n"
    )
