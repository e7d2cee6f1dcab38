"""Factorization of trees, diamonds and Laakso graphs through operators
between finite-dimensional normed spaces."""

__version__ = "0.1.0"
