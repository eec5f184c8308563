"""Numerical laboratory for recurrent and almost periodic signals."""

__version__ = "0.1.0"
