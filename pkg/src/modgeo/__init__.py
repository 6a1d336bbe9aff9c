"""Closed geodesics on the modular surface: forms, series, cycle integrals."""

__version__ = "0.1.0"
