"""Scalar and operator resolvents, bounds and elliptic test operators."""

from volterra_paths.core.grid import TimeGrid
from volterra_paths.resolvent.elliptic import (
    DiscreteEllipticOperator,
    OperatorAngle,
    build_discrete_elliptic,
    choose_shift,
    operator_angle,
)
from volterra_paths.resolvent.operator import (
    OperatorResolventTable,
    Spectralization,
    cross_method_difference,
    matrix_resolvent,
    resolvent_residual,
    solve_matrix_volterra,
    spectral_resolvent,
    spectralize,
)
from volterra_paths.resolvent.scalar import (
    BoundReport,
    ScalarResolventTable,
    half_plane_samples,
    laplace_bound_check,
    scalar_resolvent,
    sector_samples,
    solve_scalar_resolvents,
)

__all__ = [
    "TimeGrid",
    "DiscreteEllipticOperator",
    "OperatorAngle",
    "build_discrete_elliptic",
    "choose_shift",
    "operator_angle",
    "OperatorResolventTable",
    "Spectralization",
    "cross_method_difference",
    "matrix_resolvent",
    "resolvent_residual",
    "solve_matrix_volterra",
    "spectral_resolvent",
    "spectralize",
    "BoundReport",
    "ScalarResolventTable",
    "half_plane_samples",
    "laplace_bound_check",
    "scalar_resolvent",
    "sector_samples",
    "solve_scalar_resolvents",
]
