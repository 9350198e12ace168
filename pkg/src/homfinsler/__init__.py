"""Numerical toolkit for homogeneous Finsler spaces with (alpha, beta)-metrics."""

__version__ = "0.1.0"
