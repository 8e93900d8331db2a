from __future__ import annotations

import json
from pathlib import Path

from typer.testing import CliRunner

from adlv.cli import app
from adlv.cli.main import EXIT_INPUT, EXIT_OK, EXIT_UNKNOWN, EXIT_VIOLATED
from adlv.report import SCHEMA_PATH
from adlv.uppaal import read_xml

from conftest import FIXTURES

runner = CliRunner()
MODEL = str(FIXTURES / "ssu.adl")
QUERIES = str(FIXTURES / "ssu.q")


def _json(text: str) -> dict:
    return json.loads(text[text.index("{") :])


def test_check_fixture_succeeds() -> None:
    result = runner.invoke(app, ["check", MODEL, QUERIES])
    assert result.exit_code == EXIT_OK, result.output
    assert "Verification of SSU" in result.stdout


def test_check_json_follows_schema() -> None:
    result = runner.invoke(app, ["check", MODEL, QUERIES, "--json"])
    assert result.exit_code == EXIT_OK
    data = _json(result.stdout)
    schema = json.loads(SCHEMA_PATH.read_text(encoding="utf-8"))
    assert set(schema["required"]) <= set(data)
    assert set(data) <= set(schema["properties"])
    record_keys = set(schema["$defs"]["QueryRecord"]["properties"])
    for record in data["queries"]:
        assert set(record) <= record_keys
        assert record["status"] == "Satisfied"
    assert [q["label"] for q in data["queries"]][0] == "deadlock freedom"


def test_violated_query_exits_with_one(tmp_path: Path) -> None:
    queries = tmp_path / "bad.q"
    queries.write_text("A[] not C3.LCal\n", encoding="utf-8")
    result = runner.invoke(app, ["check", MODEL, str(queries)])
    assert result.exit_code == EXIT_VIOLATED
    assert "LCal" in result.stdout


def test_budget_exhaustion_exits_with_three() -> None:
    result = runner.invoke(app, ["check", MODEL, QUERIES, "--max-states", "1"])
    assert result.exit_code == EXIT_UNKNOWN


def test_budget_from_environment() -> None:
    result = runner.invoke(app, ["check", MODEL, QUERIES], env={"ADLV_MAX_STATES": "1"})
    assert result.exit_code == EXIT_UNKNOWN
    override = ["check", MODEL, QUERIES, "--max-states", "1000000"]
    assert runner.invoke(app, override, env={"ADLV_MAX_STATES": "1"}).exit_code == EXIT_OK
    bad = runner.invoke(app, ["check", MODEL, QUERIES], env={"ADLV_MAX_STATES": "lots"})
    assert bad.exit_code == EXIT_INPUT


def test_input_errors_exit_with_two(tmp_path: Path) -> None:
    assert runner.invoke(app, ["check", str(tmp_path / "absent.adl")]).exit_code == EXIT_INPUT
    broken = tmp_path / "broken.adl"
    broken.write_text("faa Broken { function F { trigger time; } }", encoding="utf-8")
    assert runner.invoke(app, ["check", str(broken)]).exit_code == EXIT_INPUT
    invalid = tmp_path / "invalid.adl"
    invalid.write_text(
        "faa Bad { function F { trigger time period 1 exec 2; } }", encoding="utf-8"
    )
    assert runner.invoke(app, ["check", str(invalid)]).exit_code == EXIT_INPUT
    bad_query = tmp_path / "bad.q"
    bad_query.write_text("A[] (C1.Init\n", encoding="utf-8")
    assert runner.invoke(app, ["check", MODEL, str(bad_query)]).exit_code == EXIT_INPUT


def test_unknown_name_in_query_is_reported_as_unknown(tmp_path: Path) -> None:
    queries = tmp_path / "unknown.q"
    queries.write_text("E<> C9.Run\nA[] not deadlock\n", encoding="utf-8")
    result = runner.invoke(app, ["check", MODEL, str(queries), "--json"])
    assert result.exit_code == EXIT_UNKNOWN
    unknown, deadlock = _json(result.stdout)["queries"]
    assert unknown["status"] == "Unknown" and "C9.Run" in unknown["message"]
    assert deadlock["status"] == "Satisfied"


def test_bundled_fixture_names_resolve(tmp_path: Path) -> None:
    with runner.isolated_filesystem(temp_dir=tmp_path):
        result = runner.invoke(app, ["check", "ssu.adl", "ssu_extra.q"])
    assert result.exit_code == EXIT_OK, result.output


def test_generated_queries_on_request() -> None:
    result = runner.invoke(
        app, ["check", MODEL, "--annex-queries", "--function-queries", "--json"]
    )
    assert result.exit_code == EXIT_OK
    labels = [q["label"] for q in _json(result.stdout)["queries"]]
    assert "SCC:post:1" in labels
    assert "Rack:executes" in labels


def test_transform_prints_network() -> None:
    result = runner.invoke(app, ["transform", MODEL])
    assert result.exit_code == EXIT_OK
    assert result.stdout.startswith("network")
    assert "automaton C1 (SteeringWheel)" in result.stdout
    assert "automaton Env" in result.stdout


def test_transform_with_observer(tmp_path: Path) -> None:
    output = tmp_path / "ssu.ta"
    result = runner.invoke(
        app,
        [
            "transform",
            MODEL,
            "-o",
            str(output),
            "--with-observer",
            "response C1.RTurn => C6.Run within 50",
        ],
    )
    assert result.exit_code == EXIT_OK
    assert "automaton Obs (Observer)" in output.read_text(encoding="utf-8")
    wrong = runner.invoke(app, ["transform", MODEL, "--with-observer", "E<> C1.RTurn"])
    assert wrong.exit_code == EXIT_INPUT


def test_export_writes_model_and_queries(tmp_path: Path) -> None:
    result = runner.invoke(app, ["export", MODEL, QUERIES, "-o", str(tmp_path)])
    assert result.exit_code == EXIT_OK
    model_file = tmp_path / "ssu.xml"
    query_file = tmp_path / "ssu.q"
    assert model_file.exists() and query_file.exists()
    net = read_xml(model_file.read_text(encoding="utf-8"))
    assert net.automata[-1].name == "Obs"
    assert query_file.read_text(encoding="utf-8").splitlines()[-1] == "A[] !Obs.error"


def test_export_json_reports_external_verdicts(tmp_path: Path) -> None:
    missing = tmp_path / "no-verifier"
    args = ["export", MODEL, QUERIES, "-o", str(tmp_path), "--uppaal-bin", str(missing), "--json"]
    result = runner.invoke(app, args)
    assert result.exit_code == EXIT_OK
    data = _json(result.stdout)
    assert data["model"] == "SSU" and data["queries"] == []
    (record,) = data["external"]
    assert record["index"] == 0 and "satisfied" not in record
    assert record["detail"]


def test_fuzz_command() -> None:
    result = runner.invoke(app, ["fuzz", "--seed", "4", "--count", "10"])
    assert result.exit_code == EXIT_OK
    assert "10 model(s) transformed cleanly" in result.stdout
