"""Export scikit-learn tree ensembles to the forest interchange format."""

__version__ = "0.1.0"
