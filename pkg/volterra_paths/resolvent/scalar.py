"""Scalar resolvents s_{w,mu} and their Laplace-domain bounds."""

from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy import optimize

from volterra_paths.core.exceptions import InvalidArgumentError, StepSingularityError
from volterra_paths.core.grid import TimeGrid
from volterra_paths.kernels.kernel import Kernel
from volterra_paths.kernels.quadrature import KernelGrid, discretize_kernel
from volterra_paths.kernels.sector import SectorCertificate, shifted_transform
from volterra_paths.utils.logging import get_logger

logger = get_logger(__name__)

PIVOT_FLOOR = 1e-12


@dataclass(frozen=True)
class ScalarResolventTable:
    """Samples of s_{w,mu}(t_k) for one complex mu."""

    mu: complex
    w: float
    grid: TimeGrid
    values: np.ndarray

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def true_values(self) -> np.ndarray:
        """exp(w t_k) * s_{w,mu}(t_k)."""
        return np.exp(self.w * self.grid.times) * self.values


def solve_scalar_resolvents(kernel_grid: KernelGrid, mus: np.ndarray) -> np.ndarray:
    """
    Forward substitution for s = exp(-w t) - mu a_w*s, batched over mu.

    The diagonal weight is treated implicitly: (1 + mu alpha_0) s_k = rhs_k.

    Args:
        kernel_grid: Discretised a_w
        mus: Complex multipliers, shape (M,)

    Returns:
        Array of shape (n+1, M)
    """
    mus = np.atleast_1d(np.asarray(mus, dtype=complex))
    grid = kernel_grid.grid
    n = grid.n
    omega = kernel_grid.omega
    beta = kernel_grid.beta

    pivot = 1.0 + mus * kernel_grid.alpha[0]
    bad = np.flatnonzero(np.abs(pivot) < PIVOT_FLOOR)
    if bad.size:
        i = int(bad[0])
        raise StepSingularityError(
            f"Implicit step is singular for mu={mus[i]}", step=1, pivot=complex(pivot[i])
        )

    forcing = np.exp(-kernel_grid.w * grid.times)
    s = np.empty((n + 1, mus.size), dtype=complex)
    s[0] = 1.0
    for k in range(1, n + 1):
        history = omega[1:k] @ s[k - 1 : 0 : -1] + beta[k - 1] * s[0]
        s[k] = (forcing[k] - mus * history) / pivot
    return s


def scalar_resolvent(
    kernel: Kernel,
    mu: complex,
    w: float,
    grid: TimeGrid,
    kernel_grid: KernelGrid | None = None,
) -> ScalarResolventTable:
    """
    Solve s_{w,mu}(t) = exp(-w t) - mu (a_w * s_{w,mu})(t) on a grid.

    Args:
        kernel: Kernel a
        mu: Complex multiplier
        w: Exponential shift
        grid: Time grid
        kernel_grid: Precomputed discretisation of a_w on grid

    Returns:
        ScalarResolventTable
    """
    if w < kernel.exp_order_w0:
        logger.warning(f"w={w} is below the exponential order {kernel.exp_order_w0} of {kernel.name}")
    kernel_grid = kernel_grid or discretize_kernel(kernel, grid, w)
    values = solve_scalar_resolvents(kernel_grid, np.array([mu]))[:, 0]
    return ScalarResolventTable(mu=complex(mu), w=w, grid=grid, values=values)


def sector_samples(psi: float, n_moduli: int = 10, n_angles: int = 10) -> np.ndarray:
    """mu samples in the closed sector of half-angle psi, log-modulus by angle."""
    moduli = np.logspace(-2.0, 2.0, n_moduli)
    angles = np.linspace(-psi, psi, n_angles)
    return (moduli[:, None] * np.exp(1j * angles[None, :])).ravel()


def half_plane_samples(n_moduli: int = 64, n_angles: int = 65) -> np.ndarray:
    """lambda samples in Re lambda > 0."""
    moduli = np.logspace(-4.0, 4.0, n_moduli)
    angles = (np.pi / 2.0) * (1.0 - 1e-9) * np.linspace(-1.0, 1.0, n_angles)
    return (moduli[:, None] * np.exp(1j * angles[None, :])).ravel()


def inverse_distance_bound(theta: float) -> float:
    """sup |1+z|^-1 over the sector of half-angle pi - theta."""
    if theta >= np.pi / 2.0:
        return 1.0
    return float(1.0 / np.sin(theta))


def ray_peak(c_reg: float, theta: float) -> float:
    """sup |c z / (1+z)^2| over the boundary rays of the sector of half-angle pi - theta."""
    direction = np.exp(1j * (np.pi - theta))

    def magnitude(log_r: float) -> float:
        r = np.exp(log_r)
        return float(np.abs(c_reg * r * direction / (1.0 + r * direction) ** 2))

    log_r = np.linspace(-14.0, 14.0, 2001)
    values = np.array([magnitude(x) for x in log_r])
    best = int(np.argmax(values))
    lo = log_r[max(best - 1, 0)]
    hi = log_r[min(best + 1, log_r.size - 1)]
    refined = optimize.minimize_scalar(
        lambda x: -magnitude(x), bounds=(lo, hi), method="bounded", options={"xatol": 1e-12}
    )
    return float(max(values[best], -refined.fun))


@dataclass
class BoundReport:
    """Measured against theoretical bound for |lam s_hat| + |lam^2 s_hat'|."""

    k_measured: float
    k_theory: float
    m1: float
    m2: float
    psi: float
    w: float
    tol: float
    n_mu: int
    n_lambda: int
    violations: list[dict[str, Any]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations and self.k_measured <= self.k_theory + self.tol

    def to_dict(self) -> dict[str, Any]:
        return {
            "K_measured": self.k_measured,
            "K_theory": self.k_theory,
            "M1": self.m1,
            "M2": self.m2,
            "psi": self.psi,
            "w": self.w,
            "tol": self.tol,
            "n_mu": self.n_mu,
            "n_lambda": self.n_lambda,
            "violations": self.violations,
            "passed": self.passed,
        }


def laplace_bound_check(
    kernel: Kernel,
    cert: SectorCertificate,
    psi: float | None = None,
    mu_samples: np.ndarray | None = None,
    lambda_samples: np.ndarray | None = None,
    tol: float = 1e-8,
) -> BoundReport:
    """
    Compare |lam s_hat| + |lam^2 s_hat'| with 2 M1 + M2 on sample grids.

    s_hat(lam) = 1 / ((lam + w)(1 + mu a_hat(lam + w))), with a_hat the
    transform certified by cert (shifted when cert.rho != 0).

    Args:
        kernel: Kernel a
        cert: Passed certificate supplying sigma, phi, c, w
        psi: Sector half-angle for mu; midpoint of (phiA_bound, phi) by default
        mu_samples: Multipliers in the sector of half-angle psi
        lambda_samples: Points with Re lambda > 0
        tol: Absolute slack on the comparison

    Returns:
        BoundReport
    """
    if not cert.passed:
        raise InvalidArgumentError("Bound check needs a passed certificate", "cert", cert.kernel)
    if psi is None:
        psi = 0.5 * (cert.phiA_bound + cert.phi)
    if not cert.phiA_bound < psi < cert.phi:
        raise InvalidArgumentError(
            "psi must lie in (phiA_bound, phi)", "psi", {"psi": psi, "lower": cert.phiA_bound, "upper": cert.phi}
        )

    mus = sector_samples(psi) if mu_samples is None else np.asarray(mu_samples, dtype=complex).ravel()
    lams = half_plane_samples() if lambda_samples is None else np.asarray(lambda_samples, dtype=complex).ravel()
    value, deriv = shifted_transform(kernel, cert.rho)
    w = cert.w

    shifted = lams + w
    a_hat = value(shifted)[None, :]
    a_prime = deriv(shifted)[None, :]
    mu = mus[:, None]
    lam = lams[None, :]

    one_plus = 1.0 + mu * a_hat
    violations: list[dict[str, Any]] = []
    degenerate = np.abs(one_plus) < 1e-14
    for i, j in zip(*np.nonzero(degenerate), strict=True):
        if len(violations) >= 16:
            break
        violations.append({"mu": complex(mus[i]), "lambda": complex(lams[j]), "condition": "1+mu*a_hat=0"})

    with np.errstate(all="ignore"):
        denom = (lam + w) * one_plus
        s_hat = 1.0 / denom
        d_denom = one_plus + (lam + w) * mu * a_prime
        s_prime = -d_denom / denom**2
        measure = np.abs(lam * s_hat) + np.abs(lam**2 * s_prime)
    measure = np.where(degenerate, np.nan, measure)
    k_measured = float(np.nanmax(measure))

    theta = cert.phi - psi
    m1 = inverse_distance_bound(theta)
    m2 = ray_peak(cert.c_reg, theta)
    k_theory = 2.0 * m1 + m2

    over = np.argwhere(measure > k_theory + tol)
    for i, j in over[:16]:
        violations.append(
            {"mu": complex(mus[i]), "lambda": complex(lams[j]), "condition": "bound", "value": float(measure[i, j])}
        )

    report = BoundReport(
        k_measured=k_measured,
        k_theory=k_theory,
        m1=m1,
        m2=m2,
        psi=psi,
        w=w,
        tol=tol,
        n_mu=mus.size,
        n_lambda=lams.size,
        violations=violations,
    )
    logger.info(f"Laplace bound: K_measured={k_measured:.6g}, K_theory={k_theory:.6g}, passed={report.passed}")
    return report
