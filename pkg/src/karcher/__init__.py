"""Karcher means, resolvents and nonlinear semigroups on the SPD cone."""

__version__ = "0.1.0"
