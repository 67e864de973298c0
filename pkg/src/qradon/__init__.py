"""Lattice theta sums, Gauss sums, circle-method arc dissections, and the
discrete fractional Radon transform along quadratic-form paraboloids."""

from ._kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
