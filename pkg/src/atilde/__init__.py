"""Exact computations for A~_n triangle-presentation groups and their boundaries."""

__version__ = "0.1.0"
