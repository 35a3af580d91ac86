"""Metaorder impact models, latent order book and estimators."""

from ._core import (
    DataError,
    DivergenceError,
    DomainError,
    FitError,
    LatentBook,
    QuadratureError,
    SaturationError,
    ac_inventory,
    ac_trajectory,
    families,
    family_eval,
    fit_curve,
    generate_population,
    hyp2f1,
    impact_curve,
    impact_log_closed,
    integrate,
    propagator_temporary,
    propagator_trajectory,
    simulate_propagator,
)

__all__ = [
    "DataError",
    "DivergenceError",
    "DomainError",
    "FitError",
    "LatentBook",
    "QuadratureError",
    "SaturationError",
    "ac_inventory",
    "ac_trajectory",
    "families",
    "family_eval",
    "fit_curve",
    "generate_population",
    "hyp2f1",
    "impact_curve",
    "impact_log_closed",
    "integrate",
    "propagator_temporary",
    "propagator_trajectory",
    "simulate_propagator",
]
