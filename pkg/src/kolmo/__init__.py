"""Numerical toolkit for degenerate Kolmogorov operators: explicit Gaussian
model kernels, the associated homogeneous Lie-group geometry, coefficient
mollification, a monotone splitting solver for Cauchy problems, Monte Carlo
simulation of the underlying SDE, and numerical Harnack / two-sided Gaussian
bound verification."""

from .group import Geometry, point, prototype_geometry, split
from .structure import BlockStructure, check_hypoellipticity, \
    detect_canonical_form

__all__ = [
    "BlockStructure", "Geometry", "check_hypoellipticity",
    "detect_canonical_form", "point", "prototype_geometry", "split",
]

__version__ = "0.1.0"
