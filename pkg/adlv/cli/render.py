"""Rich renderers for diagnostics, verdicts and traces."""

from __future__ import annotations

from typing import Sequence

from rich import box
from rich.console import RenderableType
from rich.panel import Panel
from rich.table import Table

from ..checker import Status, Trace, Verdict
from ..diagnostics import Diagnostic, Severity
from ..fuzz import FuzzFailure
from ..uppaal import ExternalVerdict

_STATUS_STYLE = {
    Status.SATISFIED: "green",
    Status.VIOLATED: "red",
    Status.UNKNOWN: "yellow",
}

_SEVERITY_STYLE = {
    Severity.ERROR: "red",
    Severity.WARNING: "yellow",
    Severity.INFO: "cyan",
}


def format_status(status: Status) -> str:
    style = _STATUS_STYLE[status]
    return f"[{style}]{status.value}[/{style}]"


def render_diagnostics(diagnostics: Sequence[Diagnostic], title: str = "Diagnostics") -> Table:
    table = Table(title=title, box=box.SIMPLE_HEAVY)
    table.add_column("Severity", justify="center")
    table.add_column("Rule")
    table.add_column("Where")
    table.add_column("Message")
    for diagnostic in diagnostics:
        style = _SEVERITY_STYLE[diagnostic.severity]
        table.add_row(
            f"[{style}]{diagnostic.severity.value}[/{style}]",
            diagnostic.rule.value,
            diagnostic.location,
            diagnostic.message,
        )
    return table


def render_verdicts(verdicts: Sequence[Verdict], model: str) -> Table:
    """One row per query, in query order."""

    table = Table(title=f"Verification of {model}", box=box.SIMPLE_HEAVY)
    table.add_column("#", justify="right")
    table.add_column("Property")
    table.add_column("Kind", justify="center")
    table.add_column("Status", justify="center")
    table.add_column("States", justify="right")
    table.add_column("Time (s)", justify="right")
    for index, verdict in enumerate(verdicts, start=1):
        query = verdict.query
        table.add_row(
            str(index),
            query.label or query.to_text(),
            query.kind.value,
            format_status(verdict.status),
            str(verdict.stats.states_explored),
            f"{verdict.stats.wall_time:.3f}",
        )
    return table


def render_trace(trace: Trace, title: str, message: str | None = None) -> RenderableType:
    body = trace.render()
    if message:
        body = f"{message}\n\n{body}"
    return Panel(body, title=title, border_style="red", box=box.SIMPLE, padding=(0, 1))


def render_external(verdicts: Sequence[ExternalVerdict]) -> Table:
    table = Table(title="External verifier", box=box.SIMPLE_HEAVY)
    table.add_column("#", justify="right")
    table.add_column("Result", justify="center")
    table.add_column("Detail")
    for verdict in verdicts:
        if verdict.satisfied is None:
            result = "[yellow]error[/yellow]"
        else:
            result = "[green]satisfied[/green]" if verdict.satisfied else "[red]violated[/red]"
        table.add_row(str(verdict.index + 1), result, verdict.detail)
    return table


def render_fuzz(failures: Sequence[FuzzFailure], count: int, seed: int) -> RenderableType:
    if not failures:
        return Panel(
            f"[green]{count} model(s) transformed cleanly[/green] (seed {seed})",
            title="Fuzz",
            border_style="green",
            box=box.SIMPLE,
        )
    table = Table(title=f"Fuzz failures (seed {seed})", box=box.SIMPLE_HEAVY)
    table.add_column("Model", justify="right")
    table.add_column("Functions", justify="right")
    table.add_column("First problem")
    for failure in failures:
        table.add_row(
            str(failure.index), str(len(failure.model.functions)), failure.problems[0]
        )
    return table


__all__ = [
    "format_status",
    "render_diagnostics",
    "render_external",
    "render_fuzz",
    "render_trace",
    "render_verdicts",
]
