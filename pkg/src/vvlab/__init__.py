"""Numerical laboratory for the vanishing viscosity limit in a disk and a shear channel."""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    BracketError,
    ConfigError,
    DomainError,
    FitError,
    InitialLayerError,
    QuadratureError,
    TruncationError,
    VVLabError,
)
