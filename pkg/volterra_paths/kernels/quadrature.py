"""
Product-trapezoidal discretisation of kernels on a time grid.

On every cell the kernel is integrated exactly (to quadrature precision)
against the linear interpolant of the other convolution factor, so weakly
singular kernels keep their accuracy.
"""

from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np
from scipy import special

from volterra_paths.core.exceptions import QuadratureError, StepSingularityError
from volterra_paths.core.grid import TimeGrid
from volterra_paths.kernels.kernel import Kernel
from volterra_paths.utils.logging import get_logger

logger = get_logger(__name__)

LEGENDRE_NODES = 10
JACOBI_NODES = 16


@dataclass(frozen=True)
class KernelGrid:
    """
    Kernel a_w(t) = exp(-w t) a(t) sampled on a grid with product weights.

    alpha[l] and beta[l] integrate a_w over cell l = [l h, (l+1) h] against the
    hat functions (1-u) and u of the local coordinate u.
    """

    grid: TimeGrid
    w: float
    samples: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    singular_exponent: float = 0.0
    kernel_name: str = ""
    self_convolution: np.ndarray | None = field(default=None, repr=False)
    shift: float = 0.0
    shift_correction: np.ndarray | None = field(default=None, repr=False)

    @property
    def omega(self) -> np.ndarray:
        """Convolution weights: omega[0] = alpha[0], omega[m] = alpha[m] + beta[m-1]."""
        omega = self.alpha.copy()
        omega[1:] += self.beta[:-1]
        return omega

    @property
    def integrals(self) -> np.ndarray:
        """Row sums of the weights, i.e. the integral of a_w over [0, t_k]."""
        return np.concatenate([[0.0], np.cumsum(self.alpha + self.beta)])

    def convolve(self, values: np.ndarray) -> np.ndarray:
        """
        Discrete convolution (a_w * f)(t_k) for grid samples of f.

        Args:
            values: Array of shape (n+1, ...) with f(t_k) along axis 0

        Returns:
            Array of the same shape; entry 0 is zero
        """
        values = np.asarray(values)
        n = self.grid.n
        if values.shape[0] != n + 1:
            raise QuadratureError(
                f"Expected {n + 1} samples, got {values.shape[0]}", stage="convolve"
            )

        omega = np.concatenate([self.omega, [0.0]])
        correction = np.zeros(n + 1)
        correction[1:] = self.beta - omega[1:]

        flat = values.reshape(n + 1, -1)
        out = np.empty(flat.shape, dtype=np.result_type(flat.dtype, float))
        for col in range(flat.shape[1]):
            out[:, col] = np.convolve(omega, flat[:, col])[: n + 1]
        out += correction[:, None] * flat[0][None, :]
        out[0] = 0.0
        return out.reshape(values.shape)

    def to_dict(self) -> dict[str, Any]:
        return {
            "kernel": self.kernel_name,
            "grid": self.grid.to_dict(),
            "w": self.w,
            "singular_exponent": self.singular_exponent,
        }


def _cell_weights(kernel: Kernel, grid: TimeGrid, w: float) -> tuple[np.ndarray, np.ndarray]:
    h = grid.h
    n = grid.n
    gamma = kernel.singular_exponent

    alpha = np.empty(n)
    beta = np.empty(n)

    # first cell: Gauss-Jacobi with weight u**gamma
    x, wj = special.roots_jacobi(JACOBI_NODES, 0.0, gamma)
    u0 = (1.0 + x) / 2.0
    tau0 = u0 * h
    g0 = kernel.regular_part(tau0) * np.exp(-w * tau0)
    scale = h ** (1.0 + gamma) / 2.0 ** (1.0 + gamma)
    alpha[0] = scale * np.sum(wj * g0 * (1.0 - u0))
    beta[0] = scale * np.sum(wj * g0 * u0)

    if n > 1:
        xl, wl = special.roots_legendre(LEGENDRE_NODES)
        u = (xl + 1.0) / 2.0
        wu = wl / 2.0
        cells = np.arange(1, n, dtype=float)[:, None]
        tau = (cells + u[None, :]) * h
        f = kernel.time_eval(tau) * np.exp(-w * tau)
        alpha[1:] = h * ((f * (1.0 - u)) @ wu)
        beta[1:] = h * ((f * u) @ wu)

    return alpha, beta


def _self_convolution(kernel: Kernel, grid: TimeGrid, w: float) -> np.ndarray:
    gamma = kernel.singular_exponent
    x, wj = special.roots_jacobi(JACOBI_NODES, gamma, gamma)
    power = 1.0 + 2.0 * gamma

    def at(t: np.ndarray) -> np.ndarray:
        left = kernel.regular_part(t[:, None] * (1.0 - x[None, :]) / 2.0)
        right = kernel.regular_part(t[:, None] * (1.0 + x[None, :]) / 2.0)
        return (t / 2.0) ** power * ((left * right) @ wj)

    values = at(grid.times[1:]) * np.exp(-w * grid.times[1:])

    # value at zero is the right limit; a*a is unbounded there when gamma < -1/2
    if power > 0:
        start = 0.0
    elif power == 0:
        start = float(at(np.array([grid.h * 1e-12]))[0])
    else:
        logger.debug(f"Self-convolution of {kernel.name} is singular at zero; first cell is first order")
        start = float(values[0])
    return np.concatenate([[start], values])


def discretize_kernel(kernel: Kernel, grid: TimeGrid, w: float = 0.0) -> KernelGrid:
    """
    Sample a kernel and build its product-trapezoidal weights.

    Args:
        kernel: Kernel to discretise
        grid: Time grid
        w: Exponential damping applied to the kernel

    Returns:
        KernelGrid for a_w on the grid
    """
    alpha, beta = _cell_weights(kernel, grid, w)
    if not (np.all(np.isfinite(alpha)) and np.all(np.isfinite(beta))):
        raise QuadratureError(f"Non-finite product weights for kernel {kernel.name}", stage="weights")

    conv = _self_convolution(kernel, grid, w)
    if not np.all(np.isfinite(conv)):
        raise QuadratureError(
            f"Non-finite self-convolution for kernel {kernel.name}", stage="self_convolution"
        )

    times = grid.times
    samples = np.empty(grid.n + 1)
    samples[1:] = kernel.time_eval(times[1:]) * np.exp(-w * times[1:])
    samples[0] = np.inf if kernel.singular_at_zero else float(kernel.time_eval(np.zeros(1))[0])
    if not np.all(np.isfinite(samples[1:])):
        raise QuadratureError(f"Kernel {kernel.name} is not finite on the grid", stage="samples")

    logger.debug(f"Discretised {kernel.name} on n={grid.n}, T={grid.T}, w={w}")

    return KernelGrid(
        grid=grid,
        w=w,
        samples=samples,
        alpha=alpha,
        beta=beta,
        singular_exponent=kernel.singular_exponent,
        kernel_name=kernel.name,
        self_convolution=conv,
    )


def _linear_moments(q: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    alpha = h * (q[:-1] / 3.0 + q[1:] / 6.0)
    beta = h * (q[:-1] / 6.0 + q[1:] / 3.0)
    return alpha, beta


def shift_kernel(grid_kernel: KernelGrid, rho: float) -> KernelGrid:
    """
    Solve s - rho a*s = a on the grid.

    The unknown is the correction q = s - a = rho a*a + rho a*q, with
    q(0) = rho (a*a)(0+); it is found by forward substitution with the
    product weights of a and the tabulated self-convolution a*a.

    Args:
        grid_kernel: Discretised kernel a_w
        rho: Shift

    Returns:
        KernelGrid for s_w with weights for the shifted kernel
    """
    if not np.isfinite(rho):
        raise QuadratureError("Shift must be finite", stage="shift")
    if rho == 0.0:
        return grid_kernel
    if grid_kernel.self_convolution is None:
        raise QuadratureError(
            "Shift solve needs the kernel self-convolution", stage="self_convolution"
        )

    n = grid_kernel.grid.n
    omega = grid_kernel.omega
    pivot = 1.0 - rho * grid_kernel.alpha[0]
    if abs(pivot) < 1e-14:
        raise StepSingularityError("Singular diagonal weight in shift solve", step=1, pivot=pivot)

    c = grid_kernel.self_convolution
    q = np.zeros(n + 1)
    q[0] = rho * c[0]
    for k in range(1, n + 1):
        history = omega[1:k] @ q[k - 1 : 0 : -1] + grid_kernel.beta[k - 1] * q[0]
        q[k] = rho * (c[k] + history) / pivot

    return shifted_grid(grid_kernel, q, rho)


def shifted_grid(grid_kernel: KernelGrid, q: np.ndarray, rho: float) -> KernelGrid:
    """KernelGrid of a + q for a piecewise-linear correction q."""
    d_alpha, d_beta = _linear_moments(q, grid_kernel.grid.h)
    return replace(
        grid_kernel,
        samples=grid_kernel.samples + q,
        alpha=grid_kernel.alpha + d_alpha,
        beta=grid_kernel.beta + d_beta,
        kernel_name=f"{grid_kernel.kernel_name}~shift({rho:g})",
        self_convolution=None,
        shift=rho,
        shift_correction=q,
    )


def continuous_part(shifted: KernelGrid) -> np.ndarray:
    """The correction q = s - a of a shifted kernel grid."""
    if shifted.shift_correction is None:
        return np.zeros(shifted.grid.n + 1)
    return shifted.shift_correction


def shift_residual(grid_kernel: KernelGrid, shifted: KernelGrid, rho: float) -> float:
    """Sup-norm defect of s - rho a*s - a over the grid."""
    if grid_kernel.self_convolution is None:
        raise QuadratureError("Residual needs the self-convolution", stage="self_convolution")
    q = continuous_part(shifted)
    a_conv_s = grid_kernel.self_convolution + grid_kernel.convolve(q)
    return float(np.max(np.abs(q - rho * a_conv_s)))


def neumann_shift(grid_kernel: KernelGrid, rho: float, terms: int = 50) -> KernelGrid:
    """
    Truncated Neumann series sum_{j>=1} rho**(j-1) a^{*j} on the grid.

    Args:
        grid_kernel: Discretised kernel a_w with self-convolution
        rho: Shift
        terms: Number of series terms

    Returns:
        KernelGrid for the truncated series
    """
    if grid_kernel.self_convolution is None:
        raise QuadratureError("Neumann series needs the self-convolution", stage="self_convolution")

    c = grid_kernel.self_convolution
    q = np.zeros(grid_kernel.grid.n + 1)
    for _ in range(max(terms - 1, 0)):
        q = rho * (c + grid_kernel.convolve(q))

    return shifted_grid(grid_kernel, q, rho)


def piecewise_linear_laplace(values: np.ndarray, grid: TimeGrid, lam: complex) -> complex:
    """Exact Laplace transform over [0, T] of the linear interpolant of grid samples."""
    z = complex(lam) * grid.h
    if abs(z) < 1e-3:
        i0 = 0.5 - z / 6.0 + z * z / 24.0
        i1 = 0.5 - z / 3.0 + z * z / 8.0
    else:
        ez = np.exp(-z)
        i0 = (z - 1.0 + ez) / (z * z)
        i1 = (1.0 - (1.0 + z) * ez) / (z * z)
    decay = np.exp(-complex(lam) * grid.times[:-1])
    return complex(grid.h * np.sum(decay * (i0 * values[:-1] + i1 * values[1:])))


@dataclass
class ShiftLaplaceReport:
    """Grid check of s_hat = a_hat / (1 - rho a_hat)."""

    rho: float
    checked: list[complex]
    skipped: list[complex]
    max_rel_error: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_rel_error <= self.tol

    def to_dict(self) -> dict[str, Any]:
        return {
            "rho": self.rho,
            "checked": self.checked,
            "skipped": self.skipped,
            "max_rel_error": self.max_rel_error,
            "tol": self.tol,
            "passed": self.passed,
        }


def shift_laplace_check(
    kernel: Kernel,
    grid_kernel: KernelGrid,
    shifted: KernelGrid,
    rho: float,
    lambdas: np.ndarray,
    tol: float = 1e-3,
    singular_tol: float = 1e-8,
) -> ShiftLaplaceReport:
    """
    Compare the transform of the grid solution with a_hat / (1 - rho a_hat).

    The transform of s = a + q is the analytic a_hat plus the exact transform
    of the piecewise-linear q on [0, T]; lambdas should make the tail beyond
    T negligible.

    Args:
        kernel: Kernel with analytic transform
        grid_kernel: Discretised a_w
        shifted: Output of shift_kernel
        rho: Shift used
        lambdas: Check points
        tol: Relative tolerance
        singular_tol: Points with |1 - rho a_hat| below this are skipped

    Returns:
        ShiftLaplaceReport
    """
    w = grid_kernel.w
    q = continuous_part(shifted)
    checked: list[complex] = []
    skipped: list[complex] = []
    worst = 0.0

    for lam in np.asarray(lambdas, dtype=complex).ravel():
        a_hat = complex(kernel.laplace(lam + w))
        denom = 1.0 - rho * a_hat
        if abs(denom) < singular_tol:
            logger.warning(f"Skipping shift Laplace check at lambda={lam}: 1 - rho*a_hat ~ 0")
            skipped.append(complex(lam))
            continue

        expected = a_hat / denom
        measured = a_hat + piecewise_linear_laplace(q, grid_kernel.grid, lam)
        worst = max(worst, abs(measured - expected) / abs(expected))
        checked.append(complex(lam))

    return ShiftLaplaceReport(rho=rho, checked=checked, skipped=skipped, max_rel_error=worst, tol=tol)
