"""Maintenance entry points: formatting, linting, type checking, tests and the report schema."""

from __future__ import annotations

import argparse
import subprocess
import sys
from collections.abc import Callable, Iterable, Sequence
from pathlib import Path

PROJECT_ROOT = Path(__file__).resolve().parent.parent
PYPROJECT = PROJECT_ROOT / "pyproject.toml"


def _module(name: str, *args: str) -> list[str]:
    return [sys.executable, "-m", name, *args]


def _run_command(command: Sequence[str]) -> int:
    return subprocess.run(command, cwd=PROJECT_ROOT).returncode


def _run_sequence(commands: Iterable[Sequence[str]]) -> int:
    """Run ``commands`` in order and return the first nonzero exit code."""

    for command in commands:
        if (code := _run_command(command)) != 0:
            return code
    return 0


LINT = _module("ruff", "check", str(PROJECT_ROOT))
TYPECHECK = _module("mypy", "--config-file", str(PYPROJECT), "adlv")
TEST = _module("pytest")


def run_format() -> int:
    return _run_command(_module("ruff", "format", str(PROJECT_ROOT)))


def run_lint() -> int:
    return _run_command(LINT)


def run_typecheck() -> int:
    return _run_command(TYPECHECK)


def run_test() -> int:
    """Lint and type-check first; pytest only runs when both pass."""

    return _run_sequence([LINT, TYPECHECK, TEST])


def run_schema() -> int:
    from .report import write_schema

    path = write_schema()
    print(f"wrote {path.relative_to(PROJECT_ROOT)}")
    return 0


COMMANDS: dict[str, Callable[[], int]] = {
    "format": run_format,
    "lint": run_lint,
    "typecheck": run_typecheck,
    "test": run_test,
    "schema": run_schema,
}


def main() -> None:
    parser = argparse.ArgumentParser(prog="python -m adlv.tools", description="adlv maintenance")
    parser.add_argument("command", choices=sorted(COMMANDS))
    args = parser.parse_args()
    sys.exit(COMMANDS[args.command]())


if __name__ == "__main__":  # pragma: no cover - module invocation
    main()


__all__ = [
    "COMMANDS",
    "run_format",
    "run_lint",
    "run_schema",
    "run_test",
    "run_typecheck",
]
