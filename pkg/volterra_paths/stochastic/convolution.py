"""Mild solutions u(t) = S(t) u0 + int_0^t S(t-s) dL(s) and their weak-form defect."""

from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np
from scipy import signal

from volterra_paths.core.exceptions import DimensionMismatchError, InvalidArgumentError
from volterra_paths.core.grid import TimeGrid
from volterra_paths.kernels.kernel import Kernel, kernel_primitive
from volterra_paths.kernels.quadrature import KernelGrid, discretize_kernel
from volterra_paths.resolvent.operator import OperatorResolventTable
from volterra_paths.stochastic.noise import MartingalePath, first_grid_index, map_ordered
from volterra_paths.utils.csv_utils import CsvHandler
from volterra_paths.utils.logging import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class SolutionPath:
    """
    Solution values u(t_k) on the grid plus the jumps of u.

    values include every jump at or before t_k; jump_sizes[i] is u(tau_i) - u(tau_i-).
    """

    grid: TimeGrid
    values: np.ndarray
    jump_times: np.ndarray = field(default_factory=lambda: np.zeros(0))
    jump_sizes: np.ndarray = field(default_factory=lambda: np.zeros((0, 1), dtype=complex))
    seed: int = 0

    @property
    def dim(self) -> int:
        return int(self.values.shape[1])

    @property
    def jumps(self) -> list[tuple[float, np.ndarray]]:
        return [(float(t), s) for t, s in zip(self.jump_times, self.jump_sizes)]

    def atoms_per_cell(self) -> np.ndarray:
        """Sum of jump sizes falling in each cell (t_k, t_{k+1}], shape (n, dim)."""
        h = self.grid.h
        n = self.grid.n
        out = np.zeros((n, self.dim), dtype=complex)
        if self.jump_times.size:
            cells = np.minimum(first_grid_index(self.jump_times, h), n) - 1
            np.add.at(out, cells, self.jump_sizes)
        return out

    def continuous_increments(self) -> np.ndarray:
        """Grid increments of u with the jump atoms removed."""
        return np.diff(self.values, axis=0) - self.atoms_per_cell()

    def to_csv(self, path: Path) -> None:
        """Rows t, re/im of each component, is_jump (grid rows only; jumps are flagged per cell)."""
        flagged = np.zeros(self.grid.n + 1)
        if self.jump_times.size:
            cells = first_grid_index(self.jump_times, self.grid.h)
            flagged[np.clip(cells, 0, self.grid.n)] = 1.0
        pairs = np.stack([self.values.real, self.values.imag], axis=-1).reshape(self.values.shape[0], -1)
        header = ["t"]
        for i in range(self.dim):
            header += [f"re_u_{i}", f"im_u_{i}"]
        header.append("is_jump")
        CsvHandler.write_table(path, header, np.column_stack([self.grid.times, pairs, flagged]))


def _first_cell_fraction(kernel: Kernel | None, delta: float, h: float) -> float:
    if delta <= 0.0:
        return 0.0
    if kernel is not None and kernel.singular_exponent != 0.0:
        return float(kernel_primitive(kernel, delta) / kernel_primitive(kernel, h))
    return delta / h


def jump_response(
    matrices: np.ndarray, h: float, tau: float, kernel: Kernel | None = None
) -> tuple[int, np.ndarray]:
    """
    S(t_k - tau) for every grid time t_k >= tau.

    Args:
        matrices: Unscaled resolvent matrices, shape (n+1, d, d)
        h: Grid step
        tau: Jump time in (0, T]
        kernel: Kernel of the resolvent; selects primitive interpolation on the first cell

    Returns:
        First index k0 with t_k0 >= tau and the matrices for k = k0..n
    """
    n = matrices.shape[0] - 1
    k0 = int(first_grid_index(np.array([tau]), h)[0])
    delta = max(k0 * h - tau, 0.0)
    lags = n - k0 + 1
    frac = np.full(lags, delta / h)
    frac[0] = _first_cell_fraction(kernel, delta, h)
    upper = np.minimum(np.arange(1, lags + 1), n)
    response = (1.0 - frac)[:, None, None] * matrices[:lags] + frac[:, None, None] * matrices[upper]
    return k0, response


def stochastic_convolution(
    table: OperatorResolventTable,
    L: MartingalePath,
    u0: np.ndarray | Sequence[complex],
    kernel: Kernel | None = None,
    method: Literal["fft", "direct"] = "fft",
) -> SolutionPath:
    """
    Left-point stochastic convolution with exact jump atoms.

    u(t_k) = S(t_k) u0 + sum_{j<k} S(t_k - t_{j+1}) dL_j + sum_{tau_i <= t_k} S(t_k - tau_i) size_i

    Args:
        table: Resolvent table; w-scaled tables are unscaled first
        L: Driving martingale on the same grid
        u0: Initial value
        kernel: Kernel of the resolvent, used for off-grid interpolation near 0
        method: fft or direct summation for the continuous part

    Returns:
        SolutionPath
    """
    if L.grid != table.grid:
        raise InvalidArgumentError("Noise and resolvent grids differ", "grid", L.grid.to_dict())
    u0 = np.asarray(u0, dtype=complex).ravel()
    if u0.size != table.dim or L.dim != table.dim:
        raise DimensionMismatchError(
            "Dimensions of resolvent, noise and initial value differ",
            expected=table.dim,
            actual={"u0": u0.size, "noise": L.dim},
        )

    S = table.unscaled().matrices
    n = table.grid.n
    h = table.grid.h
    increments = L.increments()

    values = np.empty((n + 1, table.dim), dtype=complex)
    values[:] = np.einsum("kij,j->ki", S, u0)

    if method == "fft":
        conv = signal.fftconvolve(S[:n], increments[:, None, :], axes=0)[:n].sum(axis=-1)
    elif method == "direct":
        conv = np.empty((n, table.dim), dtype=complex)
        for m in range(n):
            conv[m] = np.einsum("jil,jl->i", S[m::-1], increments[: m + 1])
    else:
        raise InvalidArgumentError(f"Unknown convolution method '{method}'", "method", method)
    values[1:] += conv

    jump_sizes = np.empty((L.jump_times.size, table.dim), dtype=complex)
    for i, (tau, size) in enumerate(zip(L.jump_times, L.sizes)):
        k0, response = jump_response(S, h, float(tau), kernel)
        values[k0:] += response @ size
        jump_sizes[i] = S[0] @ size

    return SolutionPath(grid=table.grid, values=values, jump_times=L.jump_times.copy(), jump_sizes=jump_sizes, seed=L.seed)


def convolve_ensemble(
    table: OperatorResolventTable,
    paths: Sequence[MartingalePath],
    u0: np.ndarray | Sequence[complex],
    kernel: Kernel | None = None,
    method: Literal["fft", "direct"] = "fft",
    threads: int = 1,
) -> list[SolutionPath]:
    """Stochastic convolution of every path; results keep the path order."""
    unscaled = table.unscaled()
    logger.info(f"Convolving {len(paths)} paths with the {table.method} resolvent ({method})")
    return map_ordered(lambda L: stochastic_convolution(unscaled, L, u0, kernel, method), list(paths), threads)


def weak_solution_residual(
    u: SolutionPath,
    L: MartingalePath,
    u0: np.ndarray | Sequence[complex],
    kernel: Kernel,
    A: np.ndarray,
    test_vectors: np.ndarray | None = None,
    kernel_grid: KernelGrid | None = None,
) -> float:
    """
    Defect of <u(t), x> = <u0, x> + int_0^t a(t-s) <u(s), A^* x> ds + <L(t), x>.

    The integral splits u into its jump steps, integrated exactly with the
    kernel primitive, and the remainder, integrated with the product weights
    of the resolvent solver.

    Args:
        u: Solution path
        L: Noise path that produced u
        u0: Initial value
        kernel: Kernel a
        A: Operator matrix
        test_vectors: Columns x; canonical basis when omitted
        kernel_grid: Discretisation of a at w = 0

    Returns:
        max over grid times and test vectors of |<defect, x>|
    """
    grid = L.grid
    A = np.asarray(A, dtype=complex)
    u0 = np.asarray(u0, dtype=complex).ravel()
    if A.shape != (u.dim, u.dim) or u0.size != u.dim or L.dim != u.dim:
        raise DimensionMismatchError("Inconsistent dimensions", expected=u.dim, actual=A.shape)
    if u.values.shape[0] != grid.n + 1:
        raise DimensionMismatchError("Solution and noise grids differ", expected=grid.n + 1, actual=u.values.shape[0])

    kernel_grid = kernel_grid or discretize_kernel(kernel, grid, 0.0)
    times = grid.times

    steps = np.zeros_like(u.values)
    memory = np.zeros_like(u.values)
    for tau, size in zip(u.jump_times, u.jump_sizes):
        k0 = int(first_grid_index(np.array([tau]), grid.h)[0])
        steps[k0:] += size
        memory[k0:] += np.outer(kernel_primitive(kernel, np.maximum(times[k0:] - tau, 0.0)), A @ size)

    smooth = u.values - steps
    memory += kernel_grid.convolve(smooth @ A.T)
    defect = u.values - u0[None, :] - memory - L.grid_values()

    vectors = np.eye(u.dim) if test_vectors is None else np.asarray(test_vectors, dtype=complex)
    residual = float(np.max(np.abs(defect @ vectors.conj())))
    logger.debug(f"Weak-solution residual on n={grid.n}: {residual:.3e}")
    return residual
