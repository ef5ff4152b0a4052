"""Finite-temperature three-qubit error correction and algorithmic cooling simulator."""

__version__ = "0.1.0"
