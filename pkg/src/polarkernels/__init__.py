"""Workbench for binary polar-code kernels built from code decompositions."""

__version__ = "0.1.0"
