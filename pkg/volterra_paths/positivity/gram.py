"""Positive-definiteness of operator families through Gram matrices."""

from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy import linalg

from volterra_paths.core.exceptions import InvalidArgumentError
from volterra_paths.resolvent.operator import OperatorResolventTable
from volterra_paths.utils.logging import get_logger

logger = get_logger(__name__)

MAX_GRAM_SIZE = 4096


@dataclass
class GramReport:
    """Minimum eigenvalue of the block Gram matrix of e^{-w|t|} R(t)."""

    min_eigenvalue: float
    time_samples: np.ndarray
    block_dim: int
    tol: float
    norm: float
    symmetry_defect: float

    @property
    def passed(self) -> bool:
        return self.min_eigenvalue >= -self.tol

    def to_dict(self) -> dict[str, Any]:
        return {
            "min_eigenvalue": self.min_eigenvalue,
            "time_samples": self.time_samples,
            "block_dim": self.block_dim,
            "tol": self.tol,
            "norm": self.norm,
            "symmetry_defect": self.symmetry_defect,
            "passed": self.passed,
            "witnesses": [] if self.passed else [{"min_eigenvalue": self.min_eigenvalue}],
        }


def sample_indices(table: OperatorResolventTable, time_samples: np.ndarray) -> np.ndarray:
    """Grid indices of sample times, which must be grid points."""
    return np.array([table.grid.index_of(float(t)) for t in np.asarray(time_samples, dtype=float)], dtype=int)


def assemble_gram(table: OperatorResolventTable, w: float, indices: np.ndarray) -> np.ndarray:
    """
    Block matrix G_{nm} = e^{-w|t_n - t_m|} R(t_n - t_m), R(-t) = R(t)^*.

    Args:
        table: Resolvent table; R(t) = exp(table.w t) * matrices
        w: Damping of the family
        indices: Grid indices of the sample times

    Returns:
        Complex matrix of size (N dim) x (N dim)
    """
    d = table.dim
    N = indices.size
    times = table.grid.times
    gram = np.empty((N * d, N * d), dtype=complex)
    for a, i in enumerate(indices):
        for b, j in enumerate(indices):
            lag = int(i - j)
            factor = np.exp((table.w - w) * abs(times[i] - times[j]))
            block = factor * table.matrices[abs(lag)]
            if lag < 0:
                block = block.conj().T
            gram[a * d : (a + 1) * d, b * d : (b + 1) * d] = block
    return gram


def gram_positivity_check(
    table: OperatorResolventTable,
    w: float,
    time_samples: np.ndarray,
    tol: float | None = None,
    rel_tol: float = 1e-8,
) -> GramReport:
    """
    Decide whether the sampled family e^{-w|t|} R(t) is positive semi-definite.

    Args:
        table: Resolvent table, or any table of matrices on a grid
        w: Damping
        time_samples: Grid times
        tol: Absolute tolerance; rel_tol * ||G|| when omitted
        rel_tol: Relative tolerance

    Returns:
        GramReport
    """
    indices = sample_indices(table, time_samples)
    size = indices.size * table.dim
    if size > MAX_GRAM_SIZE:
        raise InvalidArgumentError(
            f"Gram matrix of size {size} exceeds {MAX_GRAM_SIZE}", "time_samples", indices.size
        )

    gram = assemble_gram(table, w, indices)
    if not np.all(np.isfinite(gram)):
        raise InvalidArgumentError("Gram matrix has non-finite entries", "table", table.method)

    defect = float(np.max(np.abs(gram - gram.conj().T))) if size else 0.0
    hermitian = 0.5 * (gram + gram.conj().T)
    eigenvalues = linalg.eigvalsh(hermitian)
    norm = float(np.max(np.abs(eigenvalues)))
    threshold = rel_tol * norm if tol is None else tol

    report = GramReport(
        min_eigenvalue=float(eigenvalues[0]),
        time_samples=np.asarray(time_samples, dtype=float),
        block_dim=table.dim,
        tol=threshold,
        norm=norm,
        symmetry_defect=defect,
    )
    logger.info(
        f"Gram check: min eigenvalue {report.min_eigenvalue:.3e} (tol {threshold:.1e}), "
        f"symmetry defect {defect:.1e}, passed={report.passed}"
    )
    return report


def scalar_gram_matrix(values: np.ndarray, indices: np.ndarray, w: float = 0.0, table_w: float = 0.0, h: float = 1.0) -> np.ndarray:
    """
    Gram matrix of a scalar family r(t) = exp(table_w t) values[t/h].

    Args:
        values: Scalar samples on a grid
        indices: Grid indices of the sample times
        w: Damping of the family
        table_w: Scaling exponent of the stored values
        h: Grid step

    Returns:
        Hermitian N x N matrix
    """
    indices = np.asarray(indices, dtype=int)
    lag = indices[:, None] - indices[None, :]
    dist = np.abs(lag) * h
    r = np.exp((table_w - w) * dist) * np.asarray(values)[np.abs(lag)]
    return np.where(lag < 0, np.conj(r), r)
