"""Continuous-time conflict-based search for disc agents on weighted graphs."""

__version__ = "0.1.0"
