"""Finite models of ineffective orbifold atlases, their groupoids and refinements."""

__version__ = "0.1.0"
