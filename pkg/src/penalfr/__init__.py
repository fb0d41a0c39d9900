"""Flux reconstruction with volume penalization and selective frequency damping."""

__version__ = "0.1.0"
