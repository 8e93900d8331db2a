"""Typer entry-point wiring for the adlv CLI."""

from __future__ import annotations

import logging
from dataclasses import replace
from importlib import resources
from pathlib import Path

import typer
from rich.console import Console
from rich.logging import RichHandler

from .. import uppaal
from ..checker import Status, Verdict, run_queries
from ..config import MAX_STATES_ENV, CheckConfig, SearchOrder
from ..diagnostics import Severity
from ..errors import AdlvError, ParseError
from ..fuzz import fuzz as run_fuzz
from ..model import FaaModel, validate_model
from ..parser import parse_model, parse_queries
from ..queries import Query, QueryKind
from ..report import build_report
from ..ta import Network, dump_ta
from ..transform import annex_queries, attach_observer, function_queries, transform_faa
from .render import (
    render_diagnostics,
    render_external,
    render_fuzz,
    render_trace,
    render_verdicts,
)

EXIT_OK = 0
EXIT_VIOLATED = 1
EXIT_INPUT = 2
EXIT_UNKNOWN = 3

FIXTURES = ("ssu.adl", "ssu.q", "ssu_extra.q")

app = typer.Typer(add_completion=False, rich_markup_mode="rich")
console = Console()
err_console = Console(stderr=True)
logger = logging.getLogger("adlv")


@app.callback()
def _configure(
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Log debug messages."),
) -> None:
    """Compile analysis-level architecture models to timed automata and verify them."""

    logger.handlers.clear()
    logger.addHandler(RichHandler(console=err_console, show_path=False))
    logger.setLevel(logging.DEBUG if verbose else logging.WARNING)


def _fail(message: str) -> typer.Exit:
    err_console.print(f"[red]error:[/red] {message}")
    return typer.Exit(EXIT_INPUT)


def _read(path: Path) -> str:
    """Read ``path``; the bundled fixture names resolve to package data when absent."""

    if path.exists():
        try:
            return path.read_text(encoding="utf-8")
        except OSError as exc:
            raise _fail(f"{path}: {exc.strerror}") from exc
    if path.name in FIXTURES and path.parent == Path("."):
        return resources.files("adlv.fixtures").joinpath(path.name).read_text(encoding="utf-8")
    raise _fail(f"{path}: no such file")


def _load_model(path: Path) -> FaaModel:
    try:
        model = parse_model(_read(path), str(path))
    except ParseError as exc:
        raise _fail(str(exc)) from exc
    diagnostics = validate_model(model)
    if diagnostics:
        err_console.print(render_diagnostics(diagnostics, title=f"{path}"))
    if any(d.severity is Severity.ERROR for d in diagnostics):
        raise typer.Exit(EXIT_INPUT)
    return model


def _load_queries(path: Path | None) -> list[Query]:
    if path is None:
        return []
    try:
        return parse_queries(_read(path), str(path))
    except ParseError as exc:
        raise _fail(str(exc)) from exc


def _transform(model: FaaModel) -> Network:
    try:
        return transform_faa(model)
    except AdlvError as exc:
        raise _fail(str(exc)) from exc


def _config(**overrides: object) -> CheckConfig:
    """Settings from the environment; explicit options win."""

    try:
        return CheckConfig.from_env(
            **{key: value for key, value in overrides.items() if value is not None}
        )
    except AdlvError as exc:
        raise _fail(str(exc)) from exc


def _exit_code(verdicts: list[Verdict]) -> int:
    statuses = {verdict.status for verdict in verdicts}
    if Status.UNKNOWN in statuses:
        return EXIT_UNKNOWN
    if Status.VIOLATED in statuses:
        return EXIT_VIOLATED
    return EXIT_OK


@app.command()
def check(
    model_path: Path = typer.Argument(..., help="Model file (.adl)."),
    query_path: Path | None = typer.Argument(None, help="Query file (.q)."),
    json_output: bool = typer.Option(False, "--json", help="Print the report as JSON."),
    order: SearchOrder = typer.Option(SearchOrder.BFS, "--order", help="Search order."),
    max_states: int | None = typer.Option(
        None, "--max-states", min=1, help=f"Stored-state budget (default from {MAX_STATES_ENV})."
    ),
    no_subsumption: bool = typer.Option(
        False, "--no-subsumption", help="Store states by equality instead of zone inclusion."
    ),
    unbounded: bool = typer.Option(
        False, "--unbounded", help="Check bounded responses without their time bound."
    ),
    annex: bool = typer.Option(
        False, "--annex-queries", help="Append the annex post/invariant conditions as queries."
    ),
    functions: bool = typer.Option(
        False, "--function-queries", help="Append one reachability query per function."
    ),
) -> None:
    """Verify the queries of QUERY_PATH against MODEL_PATH."""

    model = _load_model(model_path)
    queries = _load_queries(query_path)
    if annex:
        queries.extend(annex_queries(model))
    if functions:
        queries.extend(function_queries(model))
    if unbounded:
        queries = [
            replace(q, bound=None) if q.kind is QueryKind.BOUNDED_RESPONSE else q for q in queries
        ]
    if not queries:
        err_console.print("[yellow]warning:[/yellow] no queries to check")
    config = _config(order=order, max_states=max_states, subsumption=not no_subsumption)
    net = _transform(model)
    try:
        verdicts = run_queries(net, queries, config)
    except AdlvError as exc:
        raise _fail(str(exc)) from exc

    report = build_report(model.name, verdicts, config)
    if json_output:
        typer.echo(report.to_json())
    else:
        console.print(render_verdicts(verdicts, model.name))
        for index, verdict in enumerate(verdicts, start=1):
            if verdict.status is Status.VIOLATED and verdict.trace is not None:
                title = f"#{index} {verdict.query.label or verdict.query.to_text()}"
                console.print(render_trace(verdict.trace, title, verdict.message))
            elif verdict.status is not Status.SATISFIED and verdict.message:
                console.print(f"[yellow]#{index}: {verdict.message}[/yellow]")
    raise typer.Exit(_exit_code(verdicts))


def _observed(net: Network, queries: list[Query]) -> Network:
    """Attach the observer of the first bounded-response query, if any."""

    responses = [q for q in queries if q.kind is QueryKind.BOUNDED_RESPONSE]
    if not responses:
        return net
    if len(responses) > 1:
        logger.warning("only the first bounded response gets an observer in the exported model")
    first = responses[0]
    assert first.premise is not None and first.conclusion is not None
    return attach_observer(net, first.premise, first.conclusion, first.bound)


@app.command()
def transform(
    model_path: Path = typer.Argument(..., help="Model file (.adl)."),
    output: Path | None = typer.Option(None, "--output", "-o", help="Write the dump here."),
    with_observer: str | None = typer.Option(
        None, "--with-observer", help="Compose an observer: 'response P => Q within T'."
    ),
) -> None:
    """Print the generated automata network in the textual dump format."""

    model = _load_model(model_path)
    net = _transform(model)
    if with_observer is not None:
        try:
            queries = parse_queries(with_observer, "--with-observer")
        except ParseError as exc:
            raise _fail(str(exc)) from exc
        if not queries or queries[0].kind is not QueryKind.BOUNDED_RESPONSE:
            raise _fail("--with-observer expects 'response P => Q within T'")
        try:
            net = _observed(net, queries)
        except AdlvError as exc:
            raise _fail(str(exc)) from exc
    text = dump_ta(net)
    if output is None:
        typer.echo(text, nl=False)
    else:
        output.write_text(text, encoding="utf-8")
        err_console.print(f"[cyan]wrote {output}[/cyan]")


@app.command()
def export(
    model_path: Path = typer.Argument(..., help="Model file (.adl)."),
    query_path: Path | None = typer.Argument(None, help="Query file (.q)."),
    output_dir: Path = typer.Option(Path("."), "--output-dir", "-o", help="Directory for outputs."),
    uppaal_bin: Path | None = typer.Option(
        None, "--uppaal-bin", help="Run this verifier on the exported files."
    ),
    json_output: bool = typer.Option(
        False, "--json", help="Print the external verdicts as a JSON report."
    ),
) -> None:
    """Write the reference tool's .xml model and .q query files."""

    model = _load_model(model_path)
    queries = _load_queries(query_path)
    try:
        net = _observed(_transform(model), queries)
        document = uppaal.export_xml(net)
    except AdlvError as exc:
        raise _fail(str(exc)) from exc

    reread = uppaal.read_xml(document.text)
    if [len(ta.edges) for ta in reread.automata] != [len(ta.edges) for ta in net.automata]:
        logger.warning("exported model does not read back with the same edges")

    output_dir.mkdir(parents=True, exist_ok=True)
    stem = model_path.stem
    model_file = output_dir / f"{stem}.xml"
    document.write(model_file)
    err_console.print(f"[cyan]wrote {model_file}[/cyan]")
    query_file: Path | None = None
    if queries:
        query_file = output_dir / f"{stem}.q"
        query_file.write_text(uppaal.export_queries(queries, document.renamed), encoding="utf-8")
        err_console.print(f"[cyan]wrote {query_file}[/cyan]")
    else:
        err_console.print("[yellow]warning:[/yellow] no queries, .q file omitted")
    for original, renamed in document.renamed.items():
        err_console.print(f"[yellow]warning:[/yellow] {original} exported as {renamed}")

    if uppaal_bin is None or query_file is None:
        return
    external = uppaal.run_external(uppaal_bin, model_file, query_file)
    if json_output:
        report = build_report(model.name, [], _config(), external)
        typer.echo(report.to_json())
    else:
        console.print(render_external(external))


@app.command("fuzz")
def fuzz_command(
    seed: int = typer.Option(0, "--seed", help="Random seed for the generated corpus."),
    count: int = typer.Option(50, "--count", min=1, help="Number of models to generate."),
) -> None:
    """Generate random valid models and check every transformation invariant."""

    failures = run_fuzz(seed, count)
    console.print(render_fuzz(failures, count, seed))
    raise typer.Exit(EXIT_VIOLATED if failures else EXIT_OK)


def main() -> None:
    app()


if __name__ == "__main__":  # pragma: no cover - CLI invocation
    main()
