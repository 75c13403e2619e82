"""Benchmark toolkit for expressibility and quantum resources of state families."""

__version__ = "0.1.0"
