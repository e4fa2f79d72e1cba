"""Numerical verification toolkit for contact structures, fibrations and monodromy."""

__version__ = "0.1.0"
