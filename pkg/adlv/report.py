"""Machine-readable verification report."""

from __future__ import annotations

import json
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

from pydantic import BaseModel, Field

from .checker import Trace, Verdict
from .config import CheckConfig
from .uppaal import ExternalVerdict

SCHEMA_PATH = Path(__file__).resolve().parent.parent / "schemas" / "report.schema.json"


def tool_version() -> str:
    try:
        return version("adlv")
    except PackageNotFoundError:  # pragma: no cover - running from a source checkout
        return "0.1.0"


class TraceStep(BaseModel):
    index: int
    action: str
    locations: dict[str, str]
    variables: dict[str, int] = Field(default_factory=dict)
    zone: list[str] = Field(default_factory=list)
    loop_entry: bool = False


class QueryRecord(BaseModel):
    label: str
    kind: str
    query: str
    status: str = Field(pattern="^(Satisfied|Violated|Unknown)$")
    states_explored: int
    wall_time: float
    message: str | None = None
    trace: list[TraceStep] | None = None


class ConfigEcho(BaseModel):
    order: str
    max_states: int
    subsumption: bool
    extrapolate: bool


class ExternalRecord(BaseModel):
    index: int
    satisfied: bool | None
    detail: str


class Report(BaseModel):
    model: str
    tool_version: str
    config: ConfigEcho
    queries: list[QueryRecord]
    external: list[ExternalRecord] | None = None

    def to_json(self) -> str:
        return self.model_dump_json(indent=2, exclude_none=True)


def trace_steps(trace: Trace) -> list[TraceStep]:
    return [
        TraceStep(
            index=position,
            action=trace.action_text(position),
            locations=trace.locations(position),
            variables=trace.changed_variables(position),
            zone=trace.zone_text(position),
            loop_entry=position == trace.loop_start,
        )
        for position in range(len(trace))
    ]


def query_record(verdict: Verdict) -> QueryRecord:
    query = verdict.query
    return QueryRecord(
        label=query.label or query.to_text(),
        kind=query.kind.value,
        query=query.to_text(),
        status=verdict.status.value,
        states_explored=verdict.stats.states_explored,
        wall_time=round(verdict.stats.wall_time, 6),
        message=verdict.message,
        trace=trace_steps(verdict.trace) if verdict.trace is not None else None,
    )


def external_records(verdicts: list[ExternalVerdict]) -> list[ExternalRecord]:
    return [
        ExternalRecord(index=v.index, satisfied=v.satisfied, detail=v.detail) for v in verdicts
    ]


def build_report(
    model: str,
    verdicts: list[Verdict],
    config: CheckConfig,
    external: list[ExternalVerdict] | None = None,
) -> Report:
    """One record per verdict, in query order, plus the external verifier's results if given."""

    return Report(
        model=model,
        tool_version=tool_version(),
        config=ConfigEcho(
            order=config.order.value,
            max_states=config.max_states,
            subsumption=config.subsumption,
            extrapolate=config.extrapolate,
        ),
        queries=[query_record(verdict) for verdict in verdicts],
        external=external_records(external) if external is not None else None,
    )


def report_schema() -> str:
    return json.dumps(Report.model_json_schema(), indent=2, sort_keys=True) + "\n"


def write_schema(path: Path = SCHEMA_PATH) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(report_schema(), encoding="utf-8")
    return path


__all__ = [
    "SCHEMA_PATH",
    "ConfigEcho",
    "ExternalRecord",
    "QueryRecord",
    "Report",
    "TraceStep",
    "build_report",
    "external_records",
    "query_record",
    "report_schema",
    "tool_version",
    "trace_steps",
    "write_schema",
]
