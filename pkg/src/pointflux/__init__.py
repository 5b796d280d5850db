"""Flux across surfaces for a point interaction in three dimensions."""

__version__ = "0.1.0"

from .model import (  # noqa: E402
    ConeSurface,
    EvolutionConfig,
    PointInteraction,
    RadialState,
    bound_state,
    make_preset_state,
    norm,
    orthogonal_gaussian,
    w_membership,
)
from .numerics.quadrature import QuadratureSpec  # noqa: E402

__all__ = [
    "ConeSurface", "EvolutionConfig", "PointInteraction", "QuadratureSpec", "RadialState",
    "bound_state", "make_preset_state", "norm", "orthogonal_gaussian", "w_membership",
]
