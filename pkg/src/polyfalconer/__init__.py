"""Exact finite-scale laboratory for Cantor-type sets with small distance sets
under polygonal norms."""

__version__ = "0.1.0"
