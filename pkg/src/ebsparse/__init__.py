"""Empirical Bayes variable selection for sparse high-dimensional regression."""

__version__ = "0.1.0"
