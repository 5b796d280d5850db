from .faddeeva import FaddeevaRangeError, erfc_complex, faddeeva, faddeeva_derivatives
from .quadrature import (
    Envelope,
    ImproperResult,
    QuadResult,
    QuadratureSpec,
    composite_rule,
    fit_power_law,
    gauss_legendre,
    integrate_improper_time,
    integrate_oscillatory,
    oscillation_edges,
    panel_error,
)

__all__ = [
    "Envelope", "FaddeevaRangeError", "ImproperResult", "QuadResult", "QuadratureSpec",
    "composite_rule", "erfc_complex", "faddeeva", "faddeeva_derivatives", "fit_power_law",
    "gauss_legendre", "integrate_improper_time", "integrate_oscillatory", "oscillation_edges",
    "panel_error",
]
