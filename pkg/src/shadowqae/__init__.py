"""Fidelity estimation by classical shadows plus quantum amplitude estimation."""

__version__ = "0.1.0"
