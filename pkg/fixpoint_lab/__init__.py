"""Fixed-point iteration laboratory."""

__version__ = "1.0.0"
