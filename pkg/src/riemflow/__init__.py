"""Finite-element curvature and elastic flow on conformally flat surfaces."""

__version__ = "0.1.0"
