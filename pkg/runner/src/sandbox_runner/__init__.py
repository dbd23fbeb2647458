"""Isolated runner for generated robot programs; see runner.py."""

from .runner import main, run

__all__ = ["main", "run"]
