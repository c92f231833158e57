"""Exact and asymptotic length distributions of monotone subsequences of random involutions."""
__version__ = "0.1.0"
