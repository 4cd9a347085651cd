"""Genetic-programming program repair with invariant-guided diversity."""

__version__ = "0.1.0"
