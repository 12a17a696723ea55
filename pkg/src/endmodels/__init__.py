"""Combinatorial-metric models of degenerate hyperbolic 3-manifold ends."""
