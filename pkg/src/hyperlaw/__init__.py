"""Numerical toolkit for 2x2 hyperbolic conservation laws with a convex
entropy: constitutive-set geometry, Hugoniot/level-set tracing, and
T4-configuration search machinery."""

__version__ = "0.1.0"
