from __future__ import annotations

import random

import pytest

from adlv.errors import ParseError
from adlv.expr import And, CmpOp, Compare, Const, Deadlock, Name, Not
from adlv.fuzz import random_model
from adlv.model import Direction, Policy, PortKind
from adlv.parser import parse_assignments, parse_expr, parse_model, parse_queries, print_model
from adlv.queries import QueryKind

from conftest import FIXTURES

PAIR = """
faa Pair {
  var shared: int[0..2] = 1;
  function Producer {
    trigger time period 10 exec 3;
    out port value: int[0..2];
    out client port ask: bool;
  }
  function Consumer as C {
    trigger event exec 0;
    in trigger port go: bool;
    in port value: int[0..2];
    annex {
      pre value >= 0;
      state Wait initial budget 0 { on value == 2 / shared := 2 -> Full; on true -> Wait2; }
      state Full budget 0 { }
      state Wait2 budget 0 { }
    }
  }
  connect Producer.value -> Consumer.value;
}
"""


def test_parse_small_model() -> None:
    model = parse_model(PAIR, "pair.adl")
    assert model.name == "Pair"
    assert [fn.name for fn in model.functions] == ["Producer", "Consumer"]
    producer, consumer = model.functions
    assert producer.trigger.policy is Policy.TIME
    assert producer.trigger.period == 10 and producer.trigger.execution_time == 3
    assert producer.instance == "Producer"
    assert producer.port("ask") is not None and producer.port("ask").kind is PortKind.CLIENT_SERVER
    assert consumer.instance == "C"
    assert consumer.trigger.policy is Policy.EVENT
    go = consumer.port("go")
    assert go is not None and go.is_trigger and go.direction is Direction.IN
    assert [state.name for state in consumer.behavior.state_machine] == ["Wait", "Full", "Wait2"]
    assert consumer.behavior.state_machine[0].budget == 0
    assert model.globals[0].name == "shared" and model.globals[0].initial == 1
    assert str(model.connectors[0]) == "Producer.value -> Consumer.value"


def test_fixture_parses() -> None:
    model = parse_model((FIXTURES / "ssu.adl").read_text(encoding="utf-8"), "ssu.adl")
    assert len(model.functions) == 6
    assert len(model.connectors) == 10
    assert model.environment is not None
    assert {fn.instance for fn in model.functions} == {f"C{i}" for i in range(1, 7)}


def test_print_model_round_trips() -> None:
    model = parse_model(PAIR)
    assert parse_model(print_model(model)) == model
    fixture = parse_model((FIXTURES / "ssu.adl").read_text(encoding="utf-8"))
    assert parse_model(print_model(fixture)) == fixture


def test_print_model_round_trips_generated_models() -> None:
    rng = random.Random(5)
    for index in range(30):
        model = random_model(rng, f"M{index}")
        assert parse_model(print_model(model)) == model


def test_syntax_error_reports_position() -> None:
    text = "faa Broken {\n  function F {\n    trigger time period exec 2;\n  }\n}\n"
    with pytest.raises(ParseError) as info:
        parse_model(text, "broken.adl")
    error = info.value
    assert error.span.file == "broken.adl"
    assert error.span.line == 3
    assert error.expected
    assert "broken.adl:3:" in str(error)


def test_expression_precedence() -> None:
    expr = parse_expr("not a < 2 and b == 1")
    assert expr == And(
        Not(Compare(CmpOp.LT, Name(("a",)), Const(2))),
        Compare(CmpOp.EQ, Name(("b",)), Const(1)),
    )
    assert parse_expr("x && y") == parse_expr("x and y")
    assert parse_expr("C3.cp") == Name(("C3", "cp"))


def test_assignments_accept_both_operators() -> None:
    assert parse_assignments("x := 1, y = x + 1") == parse_assignments("x = 1, y := x + 1")
    assert parse_assignments("") == ()


def test_query_file_labels_and_kinds() -> None:
    queries = parse_queries((FIXTURES / "ssu.q").read_text(encoding="utf-8"), "ssu.q")
    assert [q.kind for q in queries] == [
        QueryKind.DEADLOCK_FREE,
        QueryKind.LEADS_TO,
        QueryKind.LEADS_TO,
        QueryKind.INVARIANT,
        QueryKind.INVARIANT,
        QueryKind.BOUNDED_RESPONSE,
    ]
    assert queries[0].label == "deadlock freedom"
    assert queries[-1].bound == 50
    assert queries[-1].span is not None and queries[-1].span.line == 12


def test_unlabelled_queries_and_infinite_bound() -> None:
    queries = parse_queries("E<> P.A\n\nresponse P.A => P.B within inf\n")
    assert [q.label for q in queries] == ["line 1", "line 3"]
    assert queries[1].kind is QueryKind.BOUNDED_RESPONSE
    assert queries[1].bound is None


def test_deadlock_query_is_normalised() -> None:
    query = parse_queries("A[] not deadlock")[0]
    assert query.kind is QueryKind.DEADLOCK_FREE
    assert parse_expr("deadlock") == Deadlock()


def test_query_syntax_error_uses_file_line() -> None:
    with pytest.raises(ParseError) as info:
        parse_queries("E<> P.A\nA[] (P.B\n", "bad.q")
    assert info.value.span.line == 2
