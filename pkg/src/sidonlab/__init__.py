"""Numerical laboratory for Sidon, randomly Sidon and subGaussian systems."""
__version__ = "0.1.0"
