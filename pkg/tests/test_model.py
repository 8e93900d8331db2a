from __future__ import annotations

import random

from adlv.diagnostics import Rule, Severity, errors_only
from adlv.fuzz import random_model
from adlv.model import DataType, validate_model
from adlv.parser import parse_model

BASE = """
faa M {{
  function A {{
    trigger time period 10 exec 2;
    in trigger port tick: bool;
    out port o: int[0..3];
    out port sig: bool;
  }}
  function B {{
    trigger event exec 1;
    in trigger port go: bool;
    in port i: int[0..3];
    {extra}
  }}
  connect A.o -> B.i;
  connect A.sig -> B.go;
  {more}
}}
"""


def _rules(extra: str = "", more: str = "") -> list[Rule]:
    return [d.rule for d in validate_model(parse_model(BASE.format(extra=extra, more=more)))]


def test_fixture_is_valid(ssu_model) -> None:
    assert validate_model(ssu_model) == []


def test_base_model_is_valid() -> None:
    assert _rules() == []


def test_unknown_port_in_connector() -> None:
    assert Rule.UNKNOWN_PORT in _rules(more="connect A.nope -> B.i;")
    assert Rule.UNKNOWN_FUNCTION in _rules(more="connect Z.o -> B.i;")


def test_connector_direction_and_type() -> None:
    assert Rule.CONNECTOR_DIRECTION in _rules(more="connect B.i -> A.tick;")
    assert Rule.CONNECTOR_TYPE in _rules(more="connect A.sig -> B.i;")


def test_time_period_must_exceed_execution() -> None:
    text = BASE.format(extra="", more="").replace("period 10 exec 2", "period 2 exec 2")
    assert [d.rule for d in validate_model(parse_model(text))] == [Rule.TIME_PERIOD]


def test_trigger_fan_in_is_an_error() -> None:
    rules = _rules(more="env E { write B.go := 1 every 3; }")
    assert Rule.TRIGGER_FAN_IN in rules


def test_data_fan_in_is_a_warning() -> None:
    model = parse_model(BASE.format(extra="", more="env E { write B.i := 2; }"))
    diagnostics = validate_model(model)
    assert [d.rule for d in diagnostics] == [Rule.FAN_IN]
    assert diagnostics[0].severity is Severity.WARNING
    assert errors_only(diagnostics) == []


def test_env_must_target_inputs() -> None:
    assert Rule.ENV_TARGET in _rules(more="env E { write A.o := 1; }")
    assert Rule.ENV_TARGET in _rules(more="env E { write A.tick := 1 every 0; }")


def test_annex_names_must_resolve() -> None:
    rules = _rules(extra="annex { compute i := missing; }")
    assert rules == [Rule.UNRESOLVED_NAME]
    assert _rules(extra="annex { pre A.o > 0; }") == [Rule.UNRESOLVED_NAME]


def test_annex_state_machine_rules() -> None:
    assert _rules(extra="annex { state S { } }") == [Rule.INITIAL_STATE]
    assert _rules(extra="annex { state S initial { on true -> T; } }") == [Rule.UNKNOWN_STATE]


def test_parameters_checked() -> None:
    assert _rules(extra="var p: int[0..2] = 5;") == [Rule.INITIAL_OUT_OF_RANGE]
    assert _rules(extra="var i: int[0..2] = 0;") == [Rule.DUPLICATE_VARIABLE]
    assert _rules(extra="var p: int[3..2] = 3;") == [Rule.EMPTY_RANGE]


def test_duplicate_names() -> None:
    assert Rule.DUPLICATE_PORT in _rules(extra="in port i: int[0..3];")
    text = BASE.format(extra="", more="").replace("function B", "function A")
    assert Rule.DUPLICATE_FUNCTION in [d.rule for d in validate_model(parse_model(text))]


def test_trigger_ports_are_inputs() -> None:
    assert Rule.TRIGGER_DIRECTION in _rules(extra="out trigger port t: bool;")


def test_client_server_ports_are_reduced() -> None:
    diagnostics = validate_model(parse_model(BASE.format(extra="in server port s: bool;", more="")))
    assert [(d.rule, d.severity) for d in diagnostics] == [(Rule.CSPORT_REDUCED, Severity.INFO)]


def test_validation_is_deterministic() -> None:
    text = BASE.format(extra="var p: int[0..2] = 5;", more="connect A.nope -> B.i;")
    first = validate_model(parse_model(text))
    assert first == validate_model(parse_model(text))
    assert [str(d) for d in first][0].startswith("[error]")


def test_generated_models_are_valid() -> None:
    rng = random.Random(1)
    for _ in range(100):
        assert errors_only(validate_model(random_model(rng))) == []


def test_data_type_helpers() -> None:
    assert DataType.boolean().contains(1)
    assert not DataType.int_range(0, 3).contains(4)
    assert str(DataType.int_range(-1, 2)) == "int[-1..2]"
