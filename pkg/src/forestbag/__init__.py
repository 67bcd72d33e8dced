"""Argumentative and probabilistic explanations for random forest classifiers."""

__version__ = "0.1.0"
