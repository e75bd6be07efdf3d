"""Quadratic-code inner verifiers and the hypergraph-coloring reductions built on them."""

__version__ = "0.1.0"
