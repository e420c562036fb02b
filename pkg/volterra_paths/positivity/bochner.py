"""Angle budget and the Fourier-side positivity test for scalar symbols."""

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from volterra_paths.core.exceptions import InvalidArgumentError, NoAngleBudgetError
from volterra_paths.kernels.kernel import Kernel
from volterra_paths.kernels.sector import SectorCertificate
from volterra_paths.utils.logging import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class AngleBudget:
    """Dilation angle beta with phiA_bound < beta and beta + sigma < pi/2."""

    beta: float
    sigma: float
    phiA_bound: float
    upper: float

    @property
    def alpha(self) -> float:
        return 2.0 * self.beta / np.pi

    def to_dict(self) -> dict[str, float]:
        return {
            "beta": self.beta,
            "alpha": self.alpha,
            "sigma": self.sigma,
            "phiA_bound": self.phiA_bound,
            "upper": self.upper,
        }


def angle_budget(phiA_bound: float, cert: SectorCertificate) -> AngleBudget:
    """
    Midpoint of (phiA_bound, min(phi, pi/2 - sigma)).

    Args:
        phiA_bound: Operator angle
        cert: Kernel certificate

    Returns:
        AngleBudget
    """
    upper = min(cert.phi, np.pi / 2.0 - cert.sigma)
    if not upper > phiA_bound:
        raise NoAngleBudgetError("No dilation angle fits the sector constraints", lower=phiA_bound, upper=upper)
    if not cert.passed:
        raise NoAngleBudgetError("Kernel certificate did not pass", lower=phiA_bound, upper=upper)

    beta = 0.5 * (phiA_bound + upper)
    logger.debug(f"Angle budget: beta={beta:.6f} in ({phiA_bound:.6f}, {upper:.6f})")
    return AngleBudget(beta=beta, sigma=cert.sigma, phiA_bound=phiA_bound, upper=upper)


def default_tau_samples() -> np.ndarray:
    """16 negative, zero and 16 positive values, log-spaced in modulus."""
    positive = np.logspace(-3.0, 3.0, 16)
    return np.concatenate([-positive[::-1], [0.0], positive])


def default_xi_samples() -> np.ndarray:
    return np.logspace(-3.0, 3.0, 33)


@dataclass
class BochnerReport:
    """Minimum of Re[(1 + (i tau)^alpha a_hat(w + i xi))^-1 (w + i xi)^-1] over the grid."""

    min_value: float
    tol: float
    n_evaluated: int
    alpha: float
    w: float
    violations: list[dict[str, Any]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations and self.min_value >= -self.tol

    def to_dict(self) -> dict[str, Any]:
        return {
            "min_value": self.min_value,
            "tol": self.tol,
            "n_evaluated": self.n_evaluated,
            "alpha": self.alpha,
            "w": self.w,
            "violations": self.violations,
            "passed": self.passed,
        }


def bochner_check(
    kernel: Kernel,
    budget: AngleBudget,
    w: float,
    tau_samples: np.ndarray | None = None,
    xi_samples: np.ndarray | None = None,
    tol: float = 1e-10,
) -> BochnerReport:
    """
    Evaluate the real part of the dilated scalar resolvent symbol on a grid.

    For tau > 0 the dilation uses exp(+i alpha pi/2), for tau < 0 exp(-i alpha pi/2).

    Args:
        kernel: Kernel a
        budget: Angle budget giving alpha
        w: Shift of the evaluation line
        tau_samples: Dilation parameters, both signs
        xi_samples: Frequencies, nonnegative
        tol: Allowed negativity

    Returns:
        BochnerReport
    """
    tau = default_tau_samples() if tau_samples is None else np.asarray(tau_samples, dtype=float).ravel()
    xi = default_xi_samples() if xi_samples is None else np.asarray(xi_samples, dtype=float).ravel()
    if np.any(xi < 0):
        raise InvalidArgumentError("Frequencies must be nonnegative", "xi_samples", float(xi.min()))

    alpha = budget.alpha
    point = w + 1j * xi
    usable = np.abs(point) > 0
    if not np.all(usable):
        logger.debug("Skipping w + i xi = 0")
    point = point[usable]
    xi = xi[usable]

    a_hat = kernel.laplace(point)[None, :]
    dilation = (np.abs(tau) ** alpha * np.exp(1j * np.sign(tau) * alpha * np.pi / 2.0))[:, None]
    denom = 1.0 + dilation * a_hat

    violations: list[dict[str, Any]] = []
    degenerate = np.abs(denom) < 1e-14
    with np.errstate(all="ignore"):
        values = np.real(1.0 / (denom * point[None, :]))
    values = np.where(degenerate, np.nan, values)

    for i, j in np.argwhere(degenerate)[:16]:
        violations.append({"tau": float(tau[i]), "xi": float(xi[j]), "condition": "denominator"})
    for i, j in np.argwhere(values < -tol)[:16]:
        violations.append({"tau": float(tau[i]), "xi": float(xi[j]), "value": float(values[i, j])})

    finite = values[np.isfinite(values)]
    min_value = float(finite.min()) if finite.size else float("nan")
    report = BochnerReport(
        min_value=min_value,
        tol=tol,
        n_evaluated=int(values.size),
        alpha=alpha,
        w=w,
        violations=violations,
    )
    logger.info(f"Bochner check: minimum {min_value:.3e} over {values.size} points, passed={report.passed}")
    return report
