"""Command-line interface for adlv."""

from .main import app

__all__ = ["app"]
