"""Transition and stationary densities of stable processes with partial resetting."""

__version__ = "0.1.0"
