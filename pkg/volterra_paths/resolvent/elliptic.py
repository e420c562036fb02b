"""Finite-difference elliptic operators and sectoriality angles of matrices."""

from collections.abc import Callable, Sequence
from dataclasses import dataclass
from typing import Any, Literal

import numpy as np
from scipy import linalg

from volterra_paths.core.exceptions import EllipticityError, InvalidArgumentError
from volterra_paths.utils.logging import get_logger

logger = get_logger(__name__)

Coefficient = float | Callable[[np.ndarray], np.ndarray]
Boundary = Literal["dirichlet", "periodic"]


@dataclass(frozen=True)
class DiscreteEllipticOperator:
    """Central-difference discretisation of a u'' + b u' + c u on an interval."""

    matrix: np.ndarray
    x: np.ndarray
    h: float
    boundary: str
    rho: float

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])

    def to_dict(self) -> dict[str, Any]:
        return {"dim": self.dim, "h": self.h, "boundary": self.boundary, "rho": self.rho}


def _sample(coefficient: Coefficient, x: np.ndarray) -> np.ndarray:
    if callable(coefficient):
        return np.broadcast_to(np.asarray(coefficient(x), dtype=float), x.shape).copy()
    return np.full(x.shape, float(coefficient))


def build_discrete_elliptic(
    a: Coefficient,
    b: Coefficient = 0.0,
    c: Coefficient = 0.0,
    points: int = 16,
    interval: tuple[float, float] = (0.0, np.pi),
    boundary: Boundary = "dirichlet",
    delta: float = 0.0,
) -> DiscreteEllipticOperator:
    """
    Discretise A u = a u'' + b u' + c u with second-order central differences.

    Args:
        a: Leading coefficient, constant or callable of x
        b: Drift coefficient
        c: Potential
        points: Number of unknowns (interior points for Dirichlet)
        interval: Spatial interval
        boundary: dirichlet or periodic
        delta: Required lower bound for a; a must be positive in any case

    Returns:
        DiscreteEllipticOperator with rho = largest eigenvalue of the Hermitian part
    """
    if points < 3:
        raise InvalidArgumentError("Elliptic grid needs at least three points", "points", points)
    left, right = interval
    if not right > left:
        raise InvalidArgumentError("Interval must have positive length", "interval", interval)

    if boundary == "dirichlet":
        h = (right - left) / (points + 1)
        x = left + h * np.arange(1, points + 1)
    elif boundary == "periodic":
        h = (right - left) / points
        x = left + h * np.arange(points)
    else:
        raise InvalidArgumentError(f"Unknown boundary '{boundary}'", "boundary", boundary)

    a_x, b_x, c_x = _sample(a, x), _sample(b, x), _sample(c, x)
    bad = np.flatnonzero(~(a_x > 0) | (a_x < delta))
    if bad.size:
        i = int(bad[0])
        raise EllipticityError("Leading coefficient violates ellipticity", x=float(x[i]), value=float(a_x[i]))

    lower = a_x / h**2 - b_x / (2.0 * h)
    upper = a_x / h**2 + b_x / (2.0 * h)
    diag = -2.0 * a_x / h**2 + c_x

    m = points
    matrix = np.diag(diag)
    matrix[np.arange(1, m), np.arange(m - 1)] = lower[1:]
    matrix[np.arange(m - 1), np.arange(1, m)] = upper[:-1]
    if boundary == "periodic":
        matrix[0, m - 1] = lower[0]
        matrix[m - 1, 0] = upper[-1]

    hermitian = 0.5 * (matrix + matrix.T)
    rho = float(linalg.eigvalsh(hermitian)[-1])
    logger.debug(f"Elliptic operator: {m} points, {boundary}, numerical abscissa {rho:.6g}")
    return DiscreteEllipticOperator(matrix=matrix, x=x, h=h, boundary=boundary, rho=rho)


@dataclass(frozen=True)
class OperatorAngle:
    """Angles of rho - A measured from the positive real axis."""

    field_angle: float
    spectral_angle: float
    numerical_abscissa: float
    rho: float

    @property
    def dissipative(self) -> bool:
        return self.field_angle < np.pi / 2.0

    def to_dict(self) -> dict[str, float]:
        return {
            "field_angle": self.field_angle,
            "spectral_angle": self.spectral_angle,
            "numerical_abscissa": self.numerical_abscissa,
            "rho": self.rho,
        }


def operator_angle(A: np.ndarray, rho: float = 0.0, directions: int = 721) -> OperatorAngle:
    """
    Sectoriality angle of A - rho from its field of values.

    Boundary points of the numerical range of B = rho - A are found from the
    top eigenvectors of the Hermitian parts of exp(-i theta) B; the angle is
    the largest |arg| over them, and pi when 0 lies in the numerical range.

    Args:
        A: Square matrix
        rho: Shift
        directions: Number of support directions

    Returns:
        OperatorAngle
    """
    A = np.asarray(A, dtype=complex)
    B = rho * np.eye(A.shape[0]) - A

    boundary = []
    support = []
    for theta in np.linspace(0.0, 2.0 * np.pi, directions, endpoint=False):
        rotated = np.exp(-1j * theta) * B
        values, vectors = linalg.eigh(0.5 * (rotated + rotated.conj().T))
        v = vectors[:, -1]
        boundary.append(np.vdot(v, B @ v))
        support.append(values[-1])

    points = np.array(boundary)
    tiny = 1e-12 * float(np.linalg.norm(B, 2))
    if min(support) > tiny:
        # 0 is an interior point of the numerical range
        field_angle = float(np.pi)
    else:
        visible = np.abs(points) > tiny
        field_angle = float(np.max(np.abs(np.angle(points[visible])))) if np.any(visible) else 0.0

    spectral = np.abs(np.angle(rho - linalg.eigvals(A)))
    abscissa = float(linalg.eigvalsh(0.5 * (A + A.conj().T))[-1])
    return OperatorAngle(
        field_angle=field_angle,
        spectral_angle=float(np.max(spectral)),
        numerical_abscissa=abscissa,
        rho=rho,
    )


def choose_shift(
    A: np.ndarray,
    target: float,
    ladder: Sequence[float] = (0.0, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0, 512.0, 1024.0),
) -> tuple[float, OperatorAngle]:
    """
    Smallest ladder shift rho with field angle of A - rho below target.

    Args:
        A: Square matrix
        target: Angle bound
        ladder: Candidate shifts

    Returns:
        The shift and its OperatorAngle
    """
    for rho in sorted(ladder):
        angle = operator_angle(A, rho)
        if angle.field_angle < target:
            return float(rho), angle
    raise InvalidArgumentError("No shift in the ladder reaches the target angle", "target", target)
