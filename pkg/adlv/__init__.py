"""Analysis-level architecture models compiled to timed automata and verified."""

from . import checker, dbm, expr, model, parser, queries, ta, transform, uppaal
from .parser import parse_model, parse_queries
from .transform import transform_faa

__all__ = [
    "checker",
    "dbm",
    "expr",
    "model",
    "parse_model",
    "parse_queries",
    "parser",
    "queries",
    "ta",
    "transform",
    "transform_faa",
    "uppaal",
]
