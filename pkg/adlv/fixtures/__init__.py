"""Bundled SSU model and query files."""
