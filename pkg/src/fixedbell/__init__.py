"""Fixed-measurement quantum correlations versus shared-randomness models."""

__version__ = "0.1.0"
