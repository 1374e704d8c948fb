"""Rigorous high-precision approximation of the affinity dimension of
affine iterated function systems with dominated linear parts."""

__version__ = "0.1.0"
