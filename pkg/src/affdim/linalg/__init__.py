"""Exact rational linear algebra and certified spectral data."""

from .eigen import (
    LeadingEigen,
    RootEnclosure,
    default_precision,
    isolate_roots,
    leading_eigen,
    phi_s,
    singular_values,
    spectral_radius,
)
from .matrix import RationalMatrix, format_rational, parse_rational, wedge_power
from .poly import RationalPolynomial, char_poly

__all__ = [
    "LeadingEigen",
    "RationalMatrix",
    "RationalPolynomial",
    "RootEnclosure",
    "char_poly",
    "default_precision",
    "format_rational",
    "isolate_roots",
    "leading_eigen",
    "parse_rational",
    "phi_s",
    "singular_values",
    "spectral_radius",
    "wedge_power",
]
