"""Positive-definiteness checks for resolvent families and scalar symbols."""

from volterra_paths.positivity.bochner import (
    AngleBudget,
    BochnerReport,
    angle_budget,
    bochner_check,
    default_tau_samples,
    default_xi_samples,
)
from volterra_paths.positivity.gram import (
    MAX_GRAM_SIZE,
    GramReport,
    assemble_gram,
    gram_positivity_check,
    scalar_gram_matrix,
)

__all__ = [
    "AngleBudget",
    "BochnerReport",
    "angle_budget",
    "bochner_check",
    "default_tau_samples",
    "default_xi_samples",
    "MAX_GRAM_SIZE",
    "GramReport",
    "assemble_gram",
    "gram_positivity_check",
    "scalar_gram_matrix",
]
