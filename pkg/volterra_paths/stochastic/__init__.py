"""Noise simulation, stochastic convolution and path diagnostics."""

from volterra_paths.stochastic.convolution import (
    SolutionPath,
    convolve_ensemble,
    jump_response,
    stochastic_convolution,
    weak_solution_residual,
)
from volterra_paths.stochastic.diagnostics import (
    JumpTransferReport,
    RegularityReport,
    ScalingReport,
    increment_scaling,
    jump_transfer_check,
    path_regularity_diagnostics,
)
from volterra_paths.stochastic.noise import (
    JumpDistribution,
    MartingalePath,
    NoiseSpec,
    derive_seeds,
    first_grid_index,
    map_ordered,
    simulate_brownian,
    simulate_compound_poisson,
    simulate_ensemble,
    simulate_noise,
    zero_path,
)

__all__ = [
    "SolutionPath",
    "convolve_ensemble",
    "jump_response",
    "stochastic_convolution",
    "weak_solution_residual",
    "JumpTransferReport",
    "RegularityReport",
    "ScalingReport",
    "increment_scaling",
    "jump_transfer_check",
    "path_regularity_diagnostics",
    "JumpDistribution",
    "MartingalePath",
    "NoiseSpec",
    "derive_seeds",
    "first_grid_index",
    "map_ordered",
    "simulate_brownian",
    "simulate_compound_poisson",
    "simulate_ensemble",
    "simulate_noise",
    "zero_path",
]
