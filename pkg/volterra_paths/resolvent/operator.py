"""Operator resolvents S(t) for matrices A."""

from dataclasses import dataclass, replace
from pathlib import Path
from typing import Literal

import numpy as np
from scipy import integrate, linalg

from volterra_paths.core.exceptions import (
    DimensionMismatchError,
    IllConditionedEigenbasisError,
    InvalidArgumentError,
    StepSingularityError,
)
from volterra_paths.core.grid import TimeGrid
from volterra_paths.kernels.kernel import Kernel, kernel_primitive
from volterra_paths.kernels.quadrature import KernelGrid, discretize_kernel, shift_kernel
from volterra_paths.resolvent.scalar import solve_scalar_resolvents
from volterra_paths.utils.csv_utils import CsvHandler
from volterra_paths.utils.logging import get_logger

logger = get_logger(__name__)

_HEADER_DTYPE = np.dtype("<i8")
_FLOAT_DTYPE = np.dtype("<f8")
_COMPLEX_DTYPE = np.dtype("<c16")


@dataclass(frozen=True)
class OperatorResolventTable:
    """
    Matrices S_{w,A}(t_k) on a grid.

    The resolvent itself is exp(w t_k) * matrices[k]; matrices[0] is the
    identity.
    """

    dim: int
    grid: TimeGrid
    matrices: np.ndarray
    w: float = 0.0
    method: str = "matrix"

    def true_matrices(self) -> np.ndarray:
        return np.exp(self.w * self.grid.times)[:, None, None] * self.matrices

    def unscaled(self) -> "OperatorResolventTable":
        """The same resolvent stored with w = 0."""
        if self.w == 0.0:
            return self
        return replace(self, matrices=self.true_matrices(), w=0.0)

    def at(self, t: float, kernel: Kernel | None = None) -> np.ndarray:
        """
        Stored matrix at an arbitrary time in [0, T], linearly interpolated.

        On the first cell the interpolation variable is the kernel primitive
        when a kernel is given, matching the leading behaviour S - I ~ A * (1*a).

        Args:
            t: Time in [0, T]
            kernel: Kernel the table was built from

        Returns:
            dim x dim matrix
        """
        if t < 0 or t > self.grid.T * (1 + 1e-12):
            raise InvalidArgumentError("Time outside the table", "t", t)
        h = self.grid.h
        k = min(int(t // h), self.grid.n - 1)
        frac = t / h - k
        if frac <= 0.0:
            return self.matrices[k]
        if k == 0 and kernel is not None and kernel.singular_exponent != 0.0:
            frac = float(kernel_primitive(kernel, t, self.w) / kernel_primitive(kernel, h, self.w))
        return (1.0 - frac) * self.matrices[k] + frac * self.matrices[k + 1]

    def commutator_defect(self, A: np.ndarray) -> float:
        """max_k ||A S_k - S_k A|| / (||A|| ||S_k||)."""
        A = np.asarray(A)
        comm = np.einsum("ij,kjl->kil", A, self.matrices) - np.einsum("kij,jl->kil", self.matrices, A)
        scale = np.linalg.norm(A, 2) * np.linalg.norm(self.matrices, 2, axis=(1, 2))
        scale = np.where(scale > 0, scale, 1.0)
        return float(np.max(np.linalg.norm(comm, 2, axis=(1, 2)) / scale))

    def to_csv(self, path: Path) -> None:
        """Columns t, then re/im of every entry in row-major order."""
        header = ["t"]
        for i in range(self.dim):
            for j in range(self.dim):
                header += [f"re_{i}_{j}", f"im_{i}_{j}"]
        flat = self.matrices.reshape(self.grid.n + 1, -1)
        pairs = np.stack([flat.real, flat.imag], axis=-1).reshape(self.grid.n + 1, -1)
        CsvHandler.write_table(path, header, np.column_stack([self.grid.times, pairs]))

    def to_binary(self, path: Path) -> None:
        """Little-endian header dim, n (int64), w, T (float64), then complex128 matrices."""
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "wb") as f:
            f.write(np.array([self.dim, self.grid.n], dtype=_HEADER_DTYPE).tobytes())
            f.write(np.array([self.w, self.grid.T], dtype=_FLOAT_DTYPE).tobytes())
            f.write(np.ascontiguousarray(self.matrices, dtype=_COMPLEX_DTYPE).tobytes())

    @classmethod
    def read_binary(cls, path: Path, method: str = "matrix") -> "OperatorResolventTable":
        raw = Path(path).read_bytes()
        dim, n = np.frombuffer(raw, dtype=_HEADER_DTYPE, count=2)
        w, T = np.frombuffer(raw, dtype=_FLOAT_DTYPE, count=2, offset=16)
        matrices = np.frombuffer(raw, dtype=_COMPLEX_DTYPE, offset=32).reshape(int(n) + 1, int(dim), int(dim))
        return cls(
            dim=int(dim),
            grid=TimeGrid(float(T), int(n)),
            matrices=matrices.astype(complex),
            w=float(w),
            method=method,
        )


@dataclass(frozen=True)
class Spectralization:
    """Eigen-decomposition A = V diag(eigenvalues) V^-1."""

    eigenvalues: np.ndarray
    vectors: np.ndarray
    inverse: np.ndarray
    condition_number: float

    @property
    def dim(self) -> int:
        return int(self.eigenvalues.size)

    def matrix(self) -> np.ndarray:
        return (self.vectors * self.eigenvalues[None, :]) @ self.inverse

    def apply(self, values: np.ndarray) -> np.ndarray:
        """V diag(values[k]) V^-1 for each row of values, shape (K, dim)."""
        return np.einsum("ij,kj,jl->kil", self.vectors, values, self.inverse)


def _square(A: np.ndarray) -> np.ndarray:
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatchError("Operator must be a square matrix", expected="(d, d)", actual=A.shape)
    if not np.all(np.isfinite(A)):
        raise InvalidArgumentError("Operator has non-finite entries", "A", None)
    return A


def spectralize(A: np.ndarray, condition_limit: float = 1e8) -> Spectralization:
    """
    Diagonalise A.

    Args:
        A: Square matrix
        condition_limit: Largest accepted condition number of the eigenbasis

    Returns:
        Spectralization
    """
    A = _square(A)
    eigenvalues, vectors = linalg.eig(A)
    condition = float(np.linalg.cond(vectors))
    if not np.isfinite(condition) or condition > condition_limit:
        raise IllConditionedEigenbasisError(
            "Eigenvector matrix is too ill-conditioned", condition_number=condition, limit=condition_limit
        )

    inverse = linalg.inv(vectors)
    defect = np.linalg.norm(A @ vectors - vectors * eigenvalues[None, :])
    scale = max(np.linalg.norm(A), 1.0)
    if defect > 1e-8 * scale:
        raise IllConditionedEigenbasisError(
            f"Eigen-decomposition defect {defect:.3e} too large",
            condition_number=condition,
            limit=condition_limit,
        )
    return Spectralization(eigenvalues, vectors, inverse, condition)


def solve_matrix_volterra(A: np.ndarray, kernel_grid: KernelGrid) -> np.ndarray:
    """
    Blockwise forward substitution for S = exp(-w t) I + a_w*(A S).

    (I - alpha_0 A) S_k = exp(-w t_k) I + A H_k, with H_k the convolution
    history; the step matrix is factorised once.

    Args:
        A: Square matrix
        kernel_grid: Discretised a_w

    Returns:
        Array of shape (n+1, d, d)
    """
    d = A.shape[0]
    grid = kernel_grid.grid
    n = grid.n
    omega = kernel_grid.omega
    beta = kernel_grid.beta
    identity = np.eye(d, dtype=complex)

    step = identity - kernel_grid.alpha[0] * A
    lu, piv = linalg.lu_factor(step, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if pivots.min() <= 1e-14 * max(pivots.max(), 1.0):
        raise StepSingularityError("Singular step matrix I - alpha_0 A", step=1, pivot=float(pivots.min()))

    forcing = np.exp(-kernel_grid.w * grid.times)
    S = np.empty((n + 1, d, d), dtype=complex)
    S[0] = identity
    flat = S.reshape(n + 1, d * d)
    for k in range(1, n + 1):
        history = (omega[1:k] @ flat[k - 1 : 0 : -1] + beta[k - 1] * flat[0]).reshape(d, d)
        S[k] = linalg.lu_solve((lu, piv), forcing[k] * identity + A @ history, check_finite=False)
    return S


def matrix_resolvent(
    A: np.ndarray,
    kernel: Kernel,
    w: float,
    grid: TimeGrid,
    rho: float = 0.0,
    kernel_grid: KernelGrid | None = None,
) -> OperatorResolventTable:
    """
    Resolvent by direct solution of the matrix Volterra equation.

    For rho != 0 the equation is solved with the shifted kernel s and the
    operator A - rho, and S_w = R_w + rho s_w*R_w is reconstructed.

    Args:
        A: Square matrix
        kernel: Kernel a
        w: Exponential shift
        grid: Time grid
        rho: Operator shift
        kernel_grid: Precomputed discretisation of a_w

    Returns:
        OperatorResolventTable
    """
    A = _square(A).astype(complex)
    kernel_grid = kernel_grid or discretize_kernel(kernel, grid, w)

    if rho == 0.0:
        matrices = solve_matrix_volterra(A, kernel_grid)
    else:
        shifted = shift_kernel(kernel_grid, rho)
        reduced = solve_matrix_volterra(A - rho * np.eye(A.shape[0]), shifted)
        matrices = reduced + rho * shifted.convolve(reduced)
        matrices[0] = np.eye(A.shape[0])

    logger.info(f"Matrix resolvent built: dim={A.shape[0]}, n={grid.n}, w={w:g}, rho={rho:g}")
    return OperatorResolventTable(dim=A.shape[0], grid=grid, matrices=matrices, w=w, method="matrix")


def spectral_resolvent(
    spec: Spectralization,
    kernel: Kernel,
    w: float,
    grid: TimeGrid,
    kernel_grid: KernelGrid | None = None,
) -> OperatorResolventTable:
    """
    Resolvent through the eigenbasis: S_k = V diag(s_{w,-lambda_i}(t_k)) V^-1.

    Args:
        spec: Eigen-decomposition of A
        kernel: Kernel a
        w: Exponential shift
        grid: Time grid
        kernel_grid: Precomputed discretisation of a_w

    Returns:
        OperatorResolventTable
    """
    kernel_grid = kernel_grid or discretize_kernel(kernel, grid, w)
    scalars = solve_scalar_resolvents(kernel_grid, -spec.eigenvalues)
    matrices = spec.apply(scalars)
    matrices[0] = np.eye(spec.dim)

    logger.info(f"Spectral resolvent built: dim={spec.dim}, n={grid.n}, cond(V)={spec.condition_number:.3g}")
    return OperatorResolventTable(dim=spec.dim, grid=grid, matrices=matrices, w=w, method="spectral")


def _check_rule_convolution(table: OperatorResolventTable, kernel: Kernel, kernel_grid: KernelGrid) -> np.ndarray:
    """a_w*S by a rule independent of the solver's product weights."""
    grid = table.grid
    S = table.matrices
    out = np.zeros_like(S)

    if kernel.singular_at_zero:
        # product rectangle: exact cell integrals of a_w times S at the cell's upper time
        cell = kernel_grid.alpha + kernel_grid.beta
        flat = S[1:].reshape(grid.n, -1)
        conv = np.stack([np.convolve(cell, flat[:, c])[: grid.n] for c in range(flat.shape[1])], axis=-1)
        out[1:] = conv.reshape(grid.n, *S.shape[1:])
        return out

    samples = kernel_grid.samples
    out[1] = 0.5 * grid.h * (samples[1] * S[0] + samples[0] * S[1])
    for k in range(2, grid.n + 1):
        weights = samples[k::-1]
        out[k] = integrate.simpson(weights[:, None, None] * S[: k + 1], dx=grid.h, axis=0)
    return out


def resolvent_residual(
    table: OperatorResolventTable,
    A: np.ndarray,
    kernel: Kernel,
    grid: TimeGrid | None = None,
    rule: Literal["product", "check"] = "product",
    kernel_grid: KernelGrid | None = None,
) -> float:
    """
    Discrete defect of S_k = exp(-w t_k) I + a_w*(A S)(t_k).

    Args:
        table: Resolvent table
        A: Matrix the table was built for
        kernel: Kernel a
        grid: Grid; must equal the table's
        rule: product reuses the solver weights, check uses an independent rule
        kernel_grid: Precomputed discretisation of a_w

    Returns:
        max over k and basis vectors x of ||defect_k x||
    """
    A = _square(A)
    if A.shape[0] != table.dim:
        raise DimensionMismatchError("Table and operator dimensions differ", expected=table.dim, actual=A.shape[0])
    if grid is not None and grid != table.grid:
        raise DimensionMismatchError("Table grid differs", expected=table.grid.to_dict(), actual=grid.to_dict())

    kernel_grid = kernel_grid or discretize_kernel(kernel, table.grid, table.w)
    if rule == "product":
        conv = kernel_grid.convolve(table.matrices)
    elif rule == "check":
        conv = _check_rule_convolution(table, kernel, kernel_grid)
    else:
        raise InvalidArgumentError(f"Unknown residual rule '{rule}'", "rule", rule)

    forcing = np.exp(-table.w * table.grid.times)[:, None, None] * np.eye(table.dim)
    defect = table.matrices - forcing - np.einsum("ij,kjl->kil", A, conv)
    residual = float(np.max(np.linalg.norm(defect, axis=1)))
    logger.debug(f"Resolvent residual ({rule}) for {table.method} table: {residual:.3e}")
    return residual


def cross_method_difference(first: OperatorResolventTable, second: OperatorResolventTable) -> np.ndarray:
    """Entrywise max |S_first(t_k) - S_second(t_k)| for each k, on true resolvents."""
    if first.grid != second.grid or first.dim != second.dim:
        raise DimensionMismatchError(
            "Tables are not comparable",
            expected={"dim": first.dim, **first.grid.to_dict()},
            actual={"dim": second.dim, **second.grid.to_dict()},
        )
    diff = np.abs(first.true_matrices() - second.true_matrices())
    return diff.reshape(first.grid.n + 1, -1).max(axis=1)
