"""Probabilistic single-pass instruction sequences: parsing, exact analysis,
equivalence checking and projection to deterministic code."""

__version__ = "0.1.0"
