from __future__ import annotations

import os
import stat
from dataclasses import replace
from pathlib import Path

import pytest
from lxml import etree

from adlv.errors import ExportError
from adlv.fuzz import random_models
from adlv.model import DataType, VariableDecl
from adlv.parser import parse_expr, parse_queries
from adlv.ta import Edge, Location, LocationKind, Network, TimedAutomaton
from adlv.transform import attach_observer, transform_faa
from adlv.uppaal import export_queries, export_xml, read_xml, run_external

from conftest import FIXTURES


def _normalised(net: Network) -> Network:
    return replace(
        net,
        automata=tuple(
            replace(ta, final_exec=None, trigger=None, latch=None, template=ta.template_name)
            for ta in net.automata
        ),
    )


def test_document_structure(ssu_network) -> None:
    document = export_xml(ssu_network)
    assert document.text.startswith("<?xml")
    assert "flat-1_2.dtd" in document.text
    root = etree.fromstring(document.text.encode("utf-8"))
    assert root.tag == "nta"
    assert len(root.findall("template")) == len(ssu_network.automata)
    system = root.findtext("system") or ""
    assert "C1 = SteeringWheel();" in system
    assert system.strip().endswith("system C1, C2, C3, C6, C4, C5, Env;")
    declaration = root.findtext("declaration") or ""
    assert "broadcast chan" in declaration
    assert "int[0,1] Connect_C1_tick = 1;" in declaration
    wheel = root.find("template")
    assert wheel is not None and wheel.findtext("name") == "SteeringWheel"
    run = [loc for loc in wheel.findall("location") if loc.findtext("name") == "Sense"][0]
    assert run.find("committed") is not None
    assert document.renamed == {}


def test_locations_carry_grid_coordinates(ssu_network) -> None:
    root = etree.fromstring(export_xml(ssu_network).text.encode("utf-8"))
    for template in root.findall("template"):
        points = [(loc.get("x"), loc.get("y")) for loc in template.findall("location")]
        assert points[0] == ("0", "0")
        assert len(set(points)) == len(points)
    wheel = root.find("template")
    assert wheel is not None
    fifth = wheel.findall("location")[4]
    assert (fifth.get("x"), fifth.get("y")) == ("0", "100")
    assert wheel.findall("location")[1].get("x") == "150"


def test_fixture_round_trips(ssu_network) -> None:
    again = read_xml(export_xml(ssu_network).text)
    assert _normalised(again) == _normalised(ssu_network)


def test_observer_round_trips(ssu_network) -> None:
    composed = attach_observer(ssu_network, parse_expr("C1.RTurn"), parse_expr("C6.Run"), 50)
    again = read_xml(export_xml(composed).text)
    assert _normalised(again) == _normalised(composed)
    assert again.automata[-1].template == "Observer"


def test_generated_models_round_trip() -> None:
    for model in random_models(21, 50):
        net = transform_faa(model)
        assert _normalised(read_xml(export_xml(net).text)) == _normalised(net), model.name


def test_export_is_deterministic(ssu_network) -> None:
    assert export_xml(ssu_network).text == export_xml(ssu_network).text


def _reserved_network(extra: tuple[VariableDecl, ...] = ()) -> Network:
    ta = TimedAutomaton(
        name="P",
        locations=(Location("commit"), Location("B", LocationKind.URGENT)),
        edges=(Edge(0, 1, parse_expr("priority == 0")),),
    )
    decls = (VariableDecl("priority", DataType.int_range(0, 2), 0),) + extra
    return Network((ta,), (), decls)


def test_reserved_identifiers_are_renamed() -> None:
    document = export_xml(_reserved_network())
    assert document.renamed == {"priority": "priority_v", "commit": "commit_v"}
    again = read_xml(document.text)
    assert again.globals[0].name == "priority_v"
    assert again.automata[0].locations[0].name == "commit_v"
    assert again.automata[0].edges[0].guard == parse_expr("priority_v == 0")


def test_renaming_collision_is_an_error() -> None:
    clash = (VariableDecl("priority_v", DataType.int_range(0, 1), 0),)
    with pytest.raises(ExportError):
        export_xml(_reserved_network(clash))


def test_read_rejects_other_documents() -> None:
    with pytest.raises(ExportError):
        read_xml("<model/>")
    with pytest.raises(ExportError):
        read_xml("<nta>")


def test_query_export() -> None:
    queries = parse_queries((FIXTURES / "ssu.q").read_text(encoding="utf-8"))
    text = export_queries(queries)
    lines = text.splitlines()
    assert lines[0] == "// deadlock freedom"
    assert lines[1] == "A[] not deadlock"
    assert "-->" in lines[3]
    assert lines[-1] == "A[] !Obs.error"
    assert lines[-2].startswith("// response within 50")
    assert text.endswith("\n")


def test_unbounded_response_exports_leads_to() -> None:
    text = export_queries(parse_queries("response C1.RTurn => C6.Run within inf"))
    assert text.splitlines()[-1] == "Obs.Run --> Obs.Init"


def test_query_export_applies_renaming() -> None:
    text = export_queries(parse_queries("E<> P.commit"), {"commit": "commit_v"})
    assert "P.commit_v" in text


@pytest.mark.skipif(os.name == "nt", reason="uses a shell script as the verifier")
def test_external_verdicts_parsed(tmp_path: Path) -> None:
    script = tmp_path / "verifyta"
    script.write_text(
        "#!/bin/sh\necho ' -- Formula is satisfied.'\necho ' -- Formula is NOT satisfied.'\n",
        encoding="utf-8",
    )
    script.chmod(script.stat().st_mode | stat.S_IEXEC)
    verdicts = run_external(script, tmp_path / "m.xml", tmp_path / "m.q")
    assert [v.satisfied for v in verdicts] == [True, False]


def test_missing_verifier_reports_error(tmp_path: Path) -> None:
    verdicts = run_external(tmp_path / "absent", tmp_path / "m.xml", tmp_path / "m.q")
    assert len(verdicts) == 1
    assert verdicts[0].satisfied is None
