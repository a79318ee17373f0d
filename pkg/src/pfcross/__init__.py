"""Numerical laboratory for p-norms of crossed-product convolution operators over free groups."""

__version__ = "0.1.0"
