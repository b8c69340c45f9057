"""Finite Blaschke products, Orlicz sequence norms and simultaneous approximation."""

from .blaschke import ArcSet, BlaschkeProduct, PhaseCensus, phase_census, preimage_of_arc
from .coefficients import CoefficientSeries, coeffs_of_power, multiply, seq_norm, sup_coeff
from .errors import (
    BlaschkeLabError,
    CertificateInvalidError,
    FitFailure,
    MonomialError,
    ResourceError,
    SearchFailure,
    ValidationError,
)
from .orlicz import OrliczFunction, Regime, classify_regime, luxemburg_norm

__version__ = "0.1.0"

__all__ = [
    "ArcSet",
    "BlaschkeLabError",
    "BlaschkeProduct",
    "CertificateInvalidError",
    "CoefficientSeries",
    "FitFailure",
    "MonomialError",
    "OrliczFunction",
    "PhaseCensus",
    "Regime",
    "ResourceError",
    "SearchFailure",
    "ValidationError",
    "classify_regime",
    "coeffs_of_power",
    "luxemburg_norm",
    "multiply",
    "phase_census",
    "preimage_of_arc",
    "seq_norm",
    "sup_coeff",
]
