"""Core grid type and exception handling."""

from volterra_paths.core.exceptions import (
    ConfigError,
    DimensionMismatchError,
    EllipticityError,
    IllConditionedEigenbasisError,
    InvalidArgumentError,
    NoAngleBudgetError,
    QuadratureError,
    StepSingularityError,
    VolterraError,
)
from volterra_paths.core.grid import TimeGrid

__all__ = [
    "VolterraError",
    "InvalidArgumentError",
    "DimensionMismatchError",
    "StepSingularityError",
    "QuadratureError",
    "IllConditionedEigenbasisError",
    "NoAngleBudgetError",
    "EllipticityError",
    "ConfigError",
    "TimeGrid",
]
