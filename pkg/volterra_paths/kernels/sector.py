"""Sampled certification of the kernel sector and regularity conditions."""

from collections.abc import Callable
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from volterra_paths.core.exceptions import InvalidArgumentError
from volterra_paths.kernels.kernel import Kernel
from volterra_paths.utils.logging import get_logger

logger = get_logger(__name__)

DEFAULT_LADDER = (0.0, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0, 512.0, 1024.0)
MAX_WITNESSES = 16
LIMIT_RADII = (1e-16, 1e-12, 1e-8, 1e8, 1e12, 1e16)

Transform = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class SamplingSpec:
    """
    Half-plane sampling grid lambda = w + scale * r * exp(i theta).

    r runs log-spaced over [r_min, r_max], extended by limit_radii so that
    suprema reached as lambda tends to w or to infinity are seen; theta runs
    uniformly over [-pi/2, pi/2] shrunk by angle_margin; scale = max(1, w).
    """

    r_min: float = 1e-4
    r_max: float = 1e4
    n_moduli: int = 64
    n_angles: int = 65
    angle_margin: float = 0.0
    ladder: tuple[float, ...] = DEFAULT_LADDER
    limit_radii: tuple[float, ...] = LIMIT_RADII

    def validate(self) -> None:
        if self.n_moduli < 1 or self.n_angles < 1:
            raise InvalidArgumentError(
                "Sampling grid is empty", "sampling", {"n_moduli": self.n_moduli, "n_angles": self.n_angles}
            )
        if not self.ladder:
            raise InvalidArgumentError("Shift ladder is empty", "ladder", self.ladder)
        if not 0 < self.r_min <= self.r_max:
            raise InvalidArgumentError("Modulus range must satisfy 0 < r_min <= r_max", "r_range", (self.r_min, self.r_max))
        if not 0.0 <= self.angle_margin < 1.0:
            raise InvalidArgumentError("Angle margin must lie in [0, 1)", "angle_margin", self.angle_margin)
        if any(not r > 0 for r in self.limit_radii):
            raise InvalidArgumentError("Limit radii must be positive", "limit_radii", self.limit_radii)

    def moduli(self) -> np.ndarray:
        if self.n_moduli == 1:
            grid = np.array([self.r_min])
        else:
            grid = np.logspace(np.log10(self.r_min), np.log10(self.r_max), self.n_moduli)
        return np.unique(np.concatenate([grid, np.asarray(self.limit_radii, dtype=float)]))

    def angles(self) -> np.ndarray:
        if self.n_angles == 1:
            return np.zeros(1)
        return (np.pi / 2.0) * (1.0 - self.angle_margin) * np.linspace(-1.0, 1.0, self.n_angles)

    def points(self, w: float) -> np.ndarray:
        """Sample points for ladder rung w, flattened."""
        offsets = self.moduli()[:, None] * np.exp(1j * self.angles()[None, :])
        return (w + max(1.0, w) * offsets).ravel()

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data["ladder"] = list(self.ladder)
        data["limit_radii"] = list(self.limit_radii)
        return data


@dataclass(frozen=True)
class SectorViolation:
    """A sample point where a condition failed."""

    lam: complex
    condition: str
    value: float

    def to_dict(self) -> dict[str, Any]:
        return {"lambda": self.lam, "condition": self.condition, "value": self.value}


@dataclass
class SectorCertificate:
    """Measured sector constants at the reported shift w."""

    sigma: float
    phi: float
    c_reg: float
    w: float
    rho: float
    passed: bool
    phiA_bound: float
    kernel: str
    violations: list[SectorViolation] = field(default_factory=list)
    sampling: SamplingSpec = field(default_factory=SamplingSpec)
    slack: float = 1e-10

    @property
    def angle_room(self) -> float:
        """pi/2 - sigma - phiA_bound; positive when the sector condition holds."""
        return np.pi / 2.0 - self.sigma - self.phiA_bound

    def to_dict(self) -> dict[str, Any]:
        return {
            "kernel": self.kernel,
            "sigma": self.sigma,
            "phi": self.phi,
            "c": self.c_reg,
            "w": self.w,
            "rho": self.rho,
            "phiA_bound": self.phiA_bound,
            "passed": self.passed,
            "slack": self.slack,
            "violations": [v.to_dict() for v in self.violations],
            "sampling": self.sampling.to_dict(),
        }


def shifted_transform(kernel: Kernel, rho: float) -> tuple[Transform, Transform]:
    """
    Transform of the shifted kernel s with s - rho a*s = a.

    Args:
        kernel: Kernel a
        rho: Shift

    Returns:
        Evaluators for s_hat = a_hat/(1 - rho a_hat) and its derivative
    """
    if rho == 0.0:
        return kernel.laplace, kernel.laplace_deriv

    def value(lam: np.ndarray) -> np.ndarray:
        a_hat = kernel.laplace(lam)
        return a_hat / (1.0 - rho * a_hat)

    def deriv(lam: np.ndarray) -> np.ndarray:
        a_hat = kernel.laplace(lam)
        return kernel.laplace_deriv(lam) / (1.0 - rho * a_hat) ** 2

    return value, deriv


def fractional_angle_limit(beta: float) -> float:
    """Largest operator angle a fractional kernel of order beta tolerates with w = 0."""
    return float(min(np.pi * (2.0 - beta) / 2.0, np.pi * beta / 2.0))


def _witnesses(lam: np.ndarray, values: np.ndarray, mask: np.ndarray, condition: str) -> list[SectorViolation]:
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        return []
    order = idx[np.argsort(-np.nan_to_num(values[idx], nan=np.inf), kind="stable")][:MAX_WITNESSES]
    return [SectorViolation(complex(lam[i]), condition, float(values[i])) for i in order]


def _measure(
    value: Transform,
    deriv: Transform,
    lam: np.ndarray,
    phiA_bound: float,
    slack: float,
) -> tuple[float, float, float, bool, list[SectorViolation]]:
    with np.errstate(all="ignore"):
        a_hat = value(lam)
        a_prime = deriv(lam)

    finite = np.isfinite(a_hat) & np.isfinite(a_prime) & (a_hat != 0)
    violations = _witnesses(lam, np.abs(a_hat), ~finite, "non_finite")
    if not np.all(finite):
        return np.pi, 0.0, np.inf, False, violations

    arg_la = np.abs(np.angle(lam * a_hat))
    arg_a = np.abs(np.angle(a_hat))
    ratio = np.abs(lam * a_prime) / np.abs(a_hat)

    sigma = float(np.max(arg_la))
    phi = float(np.pi - np.max(arg_a))
    c_reg = float(np.max(ratio))

    sigma_ok = sigma + phiA_bound < np.pi / 2.0 - slack
    phi_ok = phi > phiA_bound + slack
    c_ok = bool(np.isfinite(c_reg))

    if not sigma_ok:
        violations += _witnesses(lam, arg_la, arg_la + phiA_bound >= np.pi / 2.0 - slack, "sector_sigma")
    if not phi_ok:
        violations += _witnesses(lam, arg_a, np.pi - arg_a <= phiA_bound + slack, "sector_phi")
    if not c_ok:
        violations += _witnesses(lam, ratio, ~np.isfinite(ratio), "regularity")

    return sigma, phi, c_reg, bool(sigma_ok and phi_ok and c_ok), violations


def verify_admissibility(
    kernel: Kernel,
    phiA_bound: float,
    sampling: SamplingSpec | None = None,
    rho: float = 0.0,
    slack: float = 1e-10,
) -> SectorCertificate:
    """
    Certify the sector and 1-regularity conditions on sampled half-planes.

    Ladder rungs w are tried in increasing order and the first passing rung
    is reported; when none passes, the last rung is reported with witnesses.

    Args:
        kernel: Kernel to certify
        phiA_bound: Sectoriality angle of the operator, in [0, pi/2)
        sampling: Sampling grid and shift ladder
        rho: Operator shift; for rho != 0 the shifted kernel is certified
        slack: Angular gap both sector conditions must clear

    Returns:
        SectorCertificate
    """
    sampling = sampling or SamplingSpec()
    sampling.validate()
    if not 0.0 <= phiA_bound < np.pi / 2.0:
        raise InvalidArgumentError("Operator angle must lie in [0, pi/2)", "phiA_bound", phiA_bound)

    value, deriv = shifted_transform(kernel, rho)
    ladder = sorted(w for w in sampling.ladder if w >= kernel.exp_order_w0)
    if not ladder:
        raise InvalidArgumentError(
            "No ladder rung exceeds the exponential order", "ladder", list(sampling.ladder)
        )

    certificate: SectorCertificate | None = None
    for w in ladder:
        lam = sampling.points(w)
        sigma, phi, c_reg, passed, violations = _measure(value, deriv, lam, phiA_bound, slack)
        logger.debug(
            f"{kernel.name} at w={w:g}: sigma={sigma:.6f}, phi={phi:.6f}, c={c_reg:.6g}, passed={passed}"
        )
        certificate = SectorCertificate(
            sigma=sigma,
            phi=phi,
            c_reg=c_reg,
            w=float(w),
            rho=rho,
            passed=passed,
            phiA_bound=phiA_bound,
            kernel=kernel.name,
            violations=[] if passed else violations,
            sampling=sampling,
            slack=slack,
        )
        if passed:
            break

    assert certificate is not None
    status = "passed" if certificate.passed else "failed"
    logger.info(
        f"Kernel {kernel.name} {status} certification at w={certificate.w:g} "
        f"(sigma={certificate.sigma:.6f}, phi={certificate.phi:.6f}, c={certificate.c_reg:.6g})"
    )
    return certificate
