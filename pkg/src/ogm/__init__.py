"""Orthogonal graph-manifold model spaces and their tree embeddings."""

__version__ = "0.1.0"
