"""Exact computations around Borst's Ord and transfinite asymptotic dimension."""

__version__ = "0.1.0"
