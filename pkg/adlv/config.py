"""Exploration settings shared by the checker and the CLI."""

from __future__ import annotations

import os
from dataclasses import dataclass, replace
from enum import Enum
from typing import Any, Mapping

from .errors import ConfigError

MAX_STATES_ENV = "ADLV_MAX_STATES"
DEFAULT_MAX_STATES = 1_000_000


class SearchOrder(str, Enum):
    BFS = "bfs"
    DFS = "dfs"


@dataclass(frozen=True, slots=True)
class CheckConfig:
    """Tunable parameters for one verification run."""

    order: SearchOrder = SearchOrder.BFS
    max_states: int = DEFAULT_MAX_STATES
    subsumption: bool = True
    extrapolate: bool = True

    def __post_init__(self) -> None:
        if self.max_states <= 0:
            raise ConfigError(f"max_states must be positive, got {self.max_states}")

    @classmethod
    def from_env(cls, environ: Mapping[str, str] | None = None, **overrides: Any) -> CheckConfig:
        """Build a config from ``ADLV_MAX_STATES``; keyword overrides win."""

        source = os.environ if environ is None else environ
        config = cls()
        raw = source.get(MAX_STATES_ENV)
        if raw is not None and raw.strip():
            try:
                config = replace(config, max_states=int(raw))
            except ValueError:
                raise ConfigError(f"{MAX_STATES_ENV}={raw!r} is not an integer") from None
        return replace(config, **overrides) if overrides else config


__all__ = ["DEFAULT_MAX_STATES", "MAX_STATES_ENV", "CheckConfig", "SearchOrder"]
