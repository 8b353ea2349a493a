"""Exact relative weight filtrations and lattice-periodic fans."""

__version__ = "0.1.0"
