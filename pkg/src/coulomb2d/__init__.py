"""Spectral solver for the two-dimensional three-body Coulomb problem."""

__version__ = "0.1.0"
