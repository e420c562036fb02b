"""Kernel certification, resolvent construction and path simulation for stochastic Volterra equations."""

__version__ = "0.1.0"
