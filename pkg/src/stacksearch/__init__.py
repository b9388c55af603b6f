"""Stacktrace similarity search over Stack Exchange style post dumps."""

__version__ = "0.1.0"
