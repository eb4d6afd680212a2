"""Anisotropic Gaussian-mixture approximation of curvelet expansions."""
__version__ = "0.1.0"
