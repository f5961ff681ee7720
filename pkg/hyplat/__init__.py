"""Automorphism groups of integral hyperbolic lattices by the dual-cone Voronoi algorithm."""

__version__ = "0.1.0"
