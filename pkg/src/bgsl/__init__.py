"""Bayesian graph structure learning with an unrolled dual proximal gradient network."""
__version__ = "0.1.0"
