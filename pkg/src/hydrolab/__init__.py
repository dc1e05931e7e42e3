"""Numerical experiments on finite-time blowup and ill-posedness of the hydrostatic Euler equations."""

from .errors import (
    BlowupSignal,
    ConfigError,
    ConvergenceError,
    DomainError,
    HydrolabError,
    HypothesisError,
    InvariantViolation,
    PoleProximityError,
    RootFindingError,
    StabilityError,
)

__version__ = "0.1.0"

__all__ = [
    "BlowupSignal",
    "ConfigError",
    "ConvergenceError",
    "DomainError",
    "HydrolabError",
    "HypothesisError",
    "InvariantViolation",
    "PoleProximityError",
    "RootFindingError",
    "StabilityError",
]
