"""Export of networks and queries in the reference model checker's file formats."""

from __future__ import annotations

import logging
import re
import subprocess
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from lxml import etree

from .errors import ExportError
from .expr import (
    TRUE,
    And,
    Arith,
    Assignment,
    Compare,
    Const,
    Expr,
    Imply,
    Name,
    Neg,
    Not,
    Or,
    rename,
    to_uppaal,
)
from .model import DataType, VariableDecl
from .parser import parse_assignments, parse_expr
from .queries import Query, QueryKind
from .ta import (
    ChannelAction,
    ClockReset,
    Edge,
    Location,
    LocationKind,
    Network,
    Polarity,
    TimedAutomaton,
)
from .transform import OBSERVER_NAME

logger = logging.getLogger(__name__)

DOCTYPE = (
    "<!DOCTYPE nta PUBLIC '-//Uppaal Team//DTD Flat System 1.1//EN' "
    "'http://www.it.uu.se/research/group/darts/uppaal/flat-1_2.dtd'>"
)

RESERVED = frozenset(
    {
        "A", "E", "bool", "break", "broadcast", "case", "chan", "clock", "commit",
        "committed", "const", "continue", "controller", "default", "do", "double",
        "else", "exists", "for", "forall", "if", "imply", "inf", "init", "int",
        "meta", "priority", "process", "progress", "return", "scalar", "select",
        "state", "strategy", "struct", "sup", "switch", "system", "trans",
        "typedef", "urgent", "void", "while", "and", "or", "not", "true", "false",
        "deadlock",
    }
)

# Locations are laid out on a grid, four per row.
LAYOUT_COLUMNS = 4
LAYOUT_DX = 150
LAYOUT_DY = 100

_CLOCK_DECL = re.compile(r"^clock\s+(?P<names>[\w\s,]+);$")
_CHAN_DECL = re.compile(r"^broadcast\s+chan\s+(?P<names>[\w\s,]+);$")
_INT_DECL = re.compile(r"^int\[(?P<lo>-?\d+),\s*(?P<hi>-?\d+)\]\s+(?P<name>\w+)\s*=\s*(?P<init>-?\d+);$")
_BOOL_DECL = re.compile(r"^bool\s+(?P<name>\w+)\s*=\s*(?P<init>true|false);$")
_INSTANCE = re.compile(r"^(?P<name>\w+)\s*=\s*(?P<template>\w+)\(\);$")
_SYSTEM = re.compile(r"^system\s+(?P<names>[\w\s,]+);$")


@dataclass(frozen=True, slots=True)
class XmlDocument:
    """Serialized model plus the identifiers renamed away from reserved words."""

    text: str
    renamed: Mapping[str, str] = field(default_factory=dict)

    def write(self, path: Path) -> None:
        path.write_text(self.text, encoding="utf-8")


# Reserved-word renaming


def _rename_map(net: Network) -> dict[str, str]:
    identifiers: list[str] = [decl.name for decl in net.globals] + list(net.channels)
    for ta in net.automata:
        identifiers.extend([ta.name, ta.template_name])
        identifiers.extend(ta.clocks)
        identifiers.extend(decl.name for decl in ta.data_vars)
        identifiers.extend(location.name for location in ta.locations)
    taken = set(identifiers)
    mapping: dict[str, str] = {}
    for name in identifiers:
        if name in RESERVED and name not in mapping:
            fresh = f"{name}_v"
            if fresh in taken:
                raise ExportError(f"cannot rename reserved word {name}: {fresh} is already in use")
            mapping[name] = fresh
            logger.warning("identifier %r clashes with a reserved word, exported as %r", name, fresh)
    return mapping


def _rename_expr(expr: Expr, mapping: Mapping[str, str]) -> Expr:
    if not mapping:
        return expr
    renamed = rename(expr, mapping)
    return _rename_qualified(renamed, mapping)


def _rename_qualified(expr: Expr, mapping: Mapping[str, str]) -> Expr:
    match expr:
        case Name(parts) if len(parts) > 1:
            return Name(tuple(mapping.get(part, part) for part in parts))
        case Arith(op, left, right):
            return Arith(op, _rename_qualified(left, mapping), _rename_qualified(right, mapping))
        case Compare(op, left, right):
            return Compare(op, _rename_qualified(left, mapping), _rename_qualified(right, mapping))
        case And(left, right):
            return And(_rename_qualified(left, mapping), _rename_qualified(right, mapping))
        case Or(left, right):
            return Or(_rename_qualified(left, mapping), _rename_qualified(right, mapping))
        case Imply(left, right):
            return Imply(_rename_qualified(left, mapping), _rename_qualified(right, mapping))
        case Not(operand):
            return Not(_rename_qualified(operand, mapping))
        case Neg(operand):
            return Neg(_rename_qualified(operand, mapping))
    return expr


def _rename_network(net: Network, mapping: Mapping[str, str]) -> Network:
    if not mapping:
        return net

    def ident(name: str) -> str:
        return mapping.get(name, name)

    def decl(d: VariableDecl) -> VariableDecl:
        return replace(d, name=ident(d.name))

    def edge(e: Edge) -> Edge:
        action = e.action
        if action is not None:
            action = ChannelAction(ident(action.channel), action.polarity)
        return replace(
            e,
            guard=_rename_expr(e.guard, mapping),
            action=action,
            updates=tuple(
                Assignment(Name.of(ident(a.target.dotted)), _rename_expr(a.value, mapping))
                for a in e.updates
            ),
            resets=tuple(ClockReset(ident(r.clock), r.value) for r in e.resets),
        )

    automata = tuple(
        replace(
            ta,
            name=ident(ta.name),
            template=ident(ta.template_name),
            locations=tuple(replace(loc, name=ident(loc.name)) for loc in ta.locations),
            clocks=tuple(ident(c) for c in ta.clocks),
            data_vars=tuple(decl(d) for d in ta.data_vars),
            edges=tuple(edge(e) for e in ta.edges),
            invariants={i: _rename_expr(inv, mapping) for i, inv in ta.invariants.items()},
        )
        for ta in net.automata
    )
    return Network(
        automata,
        tuple(ident(c) for c in net.channels),
        tuple(decl(d) for d in net.globals),
    )


# Writing


def _decl_line(decl: VariableDecl) -> str:
    if decl.data_type.is_bool:
        return f"bool {decl.name} = {'true' if decl.initial else 'false'};"
    return f"int[{decl.data_type.lo},{decl.data_type.hi}] {decl.name} = {decl.initial};"


def _global_declaration(net: Network) -> str:
    lines = [_decl_line(decl) for decl in net.globals]
    if net.channels:
        lines.append(f"broadcast chan {', '.join(net.channels)};")
    return "\n".join(lines)


def _local_declaration(ta: TimedAutomaton) -> str:
    lines = [f"clock {', '.join(ta.clocks)};"] if ta.clocks else []
    lines.extend(_decl_line(decl) for decl in ta.data_vars)
    return "\n".join(lines)


def _label(parent: etree._Element, kind: str, text: str) -> None:
    label = etree.SubElement(parent, "label", kind=kind)
    label.text = text


def _update_text(edge: Edge) -> str:
    parts = [f"{a.target.dotted} = {to_uppaal(a.value)}" for a in edge.updates]
    parts.extend(f"{r.clock} = {r.value}" for r in edge.resets)
    return ", ".join(parts)


def _template(root: etree._Element, ta: TimedAutomaton) -> None:
    template = etree.SubElement(root, "template")
    etree.SubElement(template, "name").text = ta.template_name
    etree.SubElement(template, "declaration").text = _local_declaration(ta)
    for index, location in enumerate(ta.locations):
        row, col = divmod(index, LAYOUT_COLUMNS)
        node = etree.SubElement(
            template,
            "location",
            id=f"id{index}",
            x=str(col * LAYOUT_DX),
            y=str(row * LAYOUT_DY),
        )
        etree.SubElement(node, "name").text = location.name
        if index in ta.invariants:
            _label(node, "invariant", to_uppaal(ta.invariants[index]))
        if location.kind is not LocationKind.NORMAL:
            etree.SubElement(node, location.kind.value)
    etree.SubElement(template, "init", ref=f"id{ta.initial}")
    for edge in ta.edges:
        node = etree.SubElement(template, "transition")
        etree.SubElement(node, "source", ref=f"id{edge.source}")
        etree.SubElement(node, "target", ref=f"id{edge.target}")
        if edge.guard != TRUE:
            _label(node, "guard", to_uppaal(edge.guard))
        if edge.action is not None:
            _label(node, "synchronisation", str(edge.action))
        updates = _update_text(edge)
        if updates:
            _label(node, "assignment", updates)


def _system(net: Network) -> str:
    lines: list[str] = []
    for ta in net.automata:
        if ta.name != ta.template_name:
            lines.append(f"{ta.name} = {ta.template_name}();")
    if net.automata:
        lines.append(f"system {', '.join(ta.name for ta in net.automata)};")
    return "\n".join(lines)


def export_xml(net: Network) -> XmlDocument:
    """Serialize ``net`` to the flat XML dialect; reserved identifiers get a ``_v`` suffix."""

    mapping = _rename_map(net)
    net = _rename_network(net, mapping)
    root = etree.Element("nta")
    etree.SubElement(root, "declaration").text = _global_declaration(net)
    for ta in net.automata:
        _template(root, ta)
    etree.SubElement(root, "system").text = _system(net)
    text = etree.tostring(
        root, pretty_print=True, xml_declaration=True, encoding="utf-8", doctype=DOCTYPE
    ).decode("utf-8")
    return XmlDocument(text, mapping)


def export_queries(queries: Sequence[Query], renamed: Mapping[str, str] | None = None) -> str:
    """One query per line; bounded response becomes ``A[] !Obs.error`` after a comment naming T."""

    mapping = dict(renamed or {})
    lines: list[str] = []
    for query in queries:
        if query.label:
            lines.append(f"// {query.label}")
        match query.kind:
            case QueryKind.DEADLOCK_FREE:
                lines.append("A[] not deadlock")
            case QueryKind.INVARIANT:
                assert query.expr is not None
                lines.append(f"A[] {to_uppaal(_rename_expr(query.expr, mapping))}")
            case QueryKind.REACH:
                assert query.expr is not None
                lines.append(f"E<> {to_uppaal(_rename_expr(query.expr, mapping))}")
            case QueryKind.LEADS_TO:
                assert query.premise is not None and query.conclusion is not None
                lines.append(
                    f"{to_uppaal(_rename_expr(query.premise, mapping))} --> "
                    f"{to_uppaal(_rename_expr(query.conclusion, mapping))}"
                )
            case QueryKind.BOUNDED_RESPONSE:
                bound = "inf" if query.bound is None else str(query.bound)
                lines.append(f"// response within {bound} checked by the {OBSERVER_NAME} observer")
                if query.bound is None:
                    lines.append(f"{OBSERVER_NAME}.Run --> {OBSERVER_NAME}.Init")
                else:
                    lines.append(f"A[] !{OBSERVER_NAME}.error")
    return "\n".join(lines) + ("\n" if lines else "")


# Reading back


def _split_decls(text: str | None) -> list[str]:
    return [line.strip() for line in (text or "").splitlines() if line.strip()]


def _names_list(raw: str) -> list[str]:
    return [name.strip() for name in raw.split(",") if name.strip()]


def _parse_decls(text: str | None) -> tuple[list[VariableDecl], list[str], list[str]]:
    variables: list[VariableDecl] = []
    clocks: list[str] = []
    channels: list[str] = []
    for line in _split_decls(text):
        if match := _INT_DECL.match(line):
            variables.append(
                VariableDecl(
                    match["name"],
                    DataType.int_range(int(match["lo"]), int(match["hi"])),
                    int(match["init"]),
                )
            )
        elif match := _BOOL_DECL.match(line):
            variables.append(
                VariableDecl(match["name"], DataType.boolean(), int(match["init"] == "true"))
            )
        elif match := _CLOCK_DECL.match(line):
            clocks.extend(_names_list(match["names"]))
        elif match := _CHAN_DECL.match(line):
            channels.extend(_names_list(match["names"]))
        else:
            raise ExportError(f"unrecognised declaration: {line}")
    return variables, clocks, channels


def _read_edge(node: etree._Element, ids: Mapping[str, int], clocks: Iterable[str]) -> Edge:
    clock_set = set(clocks)
    guard: Expr = TRUE
    action: ChannelAction | None = None
    updates: list[Assignment] = []
    resets: list[ClockReset] = []
    for label in node.findall("label"):
        text = label.text or ""
        match label.get("kind"):
            case "guard":
                guard = parse_expr(text)
            case "synchronisation":
                channel, mark = text[:-1].strip(), text[-1]
                polarity = Polarity.EMIT if mark == Polarity.EMIT.value else Polarity.RECEIVE
                action = ChannelAction(channel, polarity)
            case "assignment":
                for assign in parse_assignments(text):
                    if assign.target.dotted in clock_set:
                        resets.append(ClockReset(assign.target.dotted, _const(assign.value)))
                    else:
                        updates.append(assign)
    return Edge(
        ids[node.find("source").get("ref")],  # type: ignore[union-attr]
        ids[node.find("target").get("ref")],  # type: ignore[union-attr]
        guard,
        action,
        tuple(updates),
        tuple(resets),
    )


def _const(expr: Expr) -> int:
    if not isinstance(expr, Const):
        raise ExportError(f"clock reset to a non-constant value: {to_uppaal(expr)}")
    return expr.value


def _read_template(node: etree._Element) -> TimedAutomaton:
    name = node.findtext("name") or ""
    variables, clocks, _ = _parse_decls(node.findtext("declaration"))
    ids: dict[str, int] = {}
    locations: list[Location] = []
    invariants: dict[int, Expr] = {}
    for index, loc in enumerate(node.findall("location")):
        ids[loc.get("id", "")] = index
        kind = LocationKind.NORMAL
        if loc.find("committed") is not None:
            kind = LocationKind.COMMITTED
        elif loc.find("urgent") is not None:
            kind = LocationKind.URGENT
        locations.append(Location(loc.findtext("name") or f"loc{index}", kind))
        for label in loc.findall("label"):
            if label.get("kind") == "invariant":
                invariants[index] = parse_expr(label.text or "")
    init = node.find("init")
    initial = ids[init.get("ref", "")] if init is not None else 0
    edges = tuple(_read_edge(t, ids, clocks) for t in node.findall("transition"))
    return TimedAutomaton(
        name=name,
        locations=tuple(locations),
        initial=initial,
        clocks=tuple(clocks),
        data_vars=tuple(variables),
        edges=edges,
        invariants=invariants,
        template=name,
    )


def read_xml(text: str) -> Network:
    """Rebuild a network from :func:`export_xml` output."""

    try:
        root = etree.fromstring(text.encode("utf-8"))
    except etree.XMLSyntaxError as exc:
        raise ExportError(f"not well-formed XML: {exc}") from exc
    if root.tag != "nta":
        raise ExportError(f"root element is {root.tag}, expected nta")
    variables, _, channels = _parse_decls(root.findtext("declaration"))
    templates = {t.template_name: t for t in map(_read_template, root.findall("template"))}
    automata: list[TimedAutomaton] = []
    for line in _split_decls(root.findtext("system")):
        if match := _INSTANCE.match(line):
            source = templates[match["template"]]
            templates[match["name"]] = replace(source, name=match["name"])
        elif match := _SYSTEM.match(line):
            automata.extend(templates[name] for name in _names_list(match["names"]))
    return Network(tuple(automata), tuple(channels), tuple(variables))


# External verifier


@dataclass(frozen=True, slots=True)
class ExternalVerdict:
    index: int
    satisfied: bool | None
    detail: str


_FORMULA = re.compile(r"Formula is (?P<negation>NOT )?satisfied")


def run_external(binary: Path, model_path: Path, query_path: Path) -> list[ExternalVerdict]:
    """Run the external verifier on an exported pair; failures become per-query errors."""

    try:
        result = subprocess.run(
            [str(binary), str(model_path), str(query_path)],
            capture_output=True,
            text=True,
            check=False,
        )
    except OSError as exc:
        logger.warning("external verifier %s failed to start: %s", binary, exc)
        return [ExternalVerdict(0, None, str(exc))]
    verdicts = [
        ExternalVerdict(index, match["negation"] is None, match.group(0))
        for index, match in enumerate(_FORMULA.finditer(result.stdout))
    ]
    if result.returncode != 0 or not verdicts:
        detail = (result.stderr or result.stdout).strip().splitlines()
        message = detail[-1] if detail else f"exit code {result.returncode}"
        logger.warning("external verifier reported: %s", message)
        verdicts.append(ExternalVerdict(len(verdicts), None, message))
    return verdicts


__all__ = [
    "DOCTYPE",
    "RESERVED",
    "ExternalVerdict",
    "XmlDocument",
    "export_queries",
    "export_xml",
    "read_xml",
    "run_external",
]
