"""Exact lattice-tower models of irregular connections on discs and P^1."""

__version__ = "0.1.0"
