"""Spectral stability toolkit for the hyperbolic-parabolic vasculogenesis model."""

from .model import (
    DerivedCoeffs,
    ModelParams,
    PressureLaw,
    Stability,
    classify_stability,
    derive_coeffs,
)

__version__ = "0.1.0"

__all__ = [
    "DerivedCoeffs",
    "ModelParams",
    "PressureLaw",
    "Stability",
    "classify_stability",
    "derive_coeffs",
    "__version__",
]
