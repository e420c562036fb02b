"""Scalar kernels, their discretisation and admissibility certification."""

from volterra_paths.kernels.kernel import (
    BUILTIN_KERNELS,
    Kernel,
    LaplaceConsistencyReport,
    builtin_kernel,
    kernel_primitive,
    laplace_consistency,
    numeric_kernel,
    numeric_laplace,
)
from volterra_paths.kernels.quadrature import (
    KernelGrid,
    ShiftLaplaceReport,
    discretize_kernel,
    neumann_shift,
    shift_kernel,
    shift_laplace_check,
    shift_residual,
)
from volterra_paths.kernels.sector import (
    DEFAULT_LADDER,
    SamplingSpec,
    SectorCertificate,
    SectorViolation,
    fractional_angle_limit,
    shifted_transform,
    verify_admissibility,
)

__all__ = [
    "BUILTIN_KERNELS",
    "Kernel",
    "LaplaceConsistencyReport",
    "builtin_kernel",
    "kernel_primitive",
    "laplace_consistency",
    "numeric_kernel",
    "numeric_laplace",
    "KernelGrid",
    "ShiftLaplaceReport",
    "discretize_kernel",
    "neumann_shift",
    "shift_kernel",
    "shift_laplace_check",
    "shift_residual",
    "DEFAULT_LADDER",
    "SamplingSpec",
    "SectorCertificate",
    "SectorViolation",
    "fractional_angle_limit",
    "shifted_transform",
    "verify_admissibility",
]
