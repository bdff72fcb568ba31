"""Exact certification pipeline for the column number g(Δ,2)."""

__version__ = "0.3.0"
