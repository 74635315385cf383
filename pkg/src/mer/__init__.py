"""Micro-expression recognition on objective, AU-derived classes."""

__version__ = "0.1.0"
