import numpy as np
import pytest

from volterra_paths.core.exceptions import InvalidArgumentError
from volterra_paths.core.grid import TimeGrid
from volterra_paths.kernels.kernel import Kernel, builtin_kernel
from volterra_paths.kernels.sector import verify_admissibility
from volterra_paths.positivity.gram import (
    MAX_GRAM_SIZE,
    assemble_gram,
    gram_positivity_check,
    sample_indices,
    scalar_gram_matrix,
)
from volterra_paths.resolvent.elliptic import build_discrete_elliptic
from volterra_paths.resolvent.operator import OperatorResolventTable, matrix_resolvent

NILPOTENT = np.array([[0.0, 3.0], [0.0, 0.0]])


def _nilpotent_table(grid: TimeGrid) -> OperatorResolventTable:
    matrices = np.eye(2)[None, :, :] + grid.times[:, None, None] * NILPOTENT[None, :, :]
    return OperatorResolventTable(dim=2, grid=grid, matrices=matrices.astype(complex), method="nilpotent")


def _equispaced(grid: TimeGrid, count: int) -> np.ndarray:
    return grid.times[np.round(np.linspace(0, grid.n, count)).astype(int)]


def test_single_sample_gives_identity(half_fractional: Kernel, unit_grid: TimeGrid) -> None:
    table = matrix_resolvent(np.diag([-1.0, -4.0]), half_fractional, 0.0, unit_grid)

    report = gram_positivity_check(table, 0.0, np.array([0.0]))

    assert report.min_eigenvalue == pytest.approx(1.0)
    assert report.passed


def test_dissipative_diagonal_resolvent_is_positive_definite(half_fractional: Kernel, unit_grid: TimeGrid) -> None:
    table = matrix_resolvent(np.diag([-1.0, -4.0]), half_fractional, 0.0, unit_grid)

    report = gram_positivity_check(table, 0.0, _equispaced(unit_grid, 8))

    assert report.passed, report.to_dict()
    assert report.block_dim == 2
    assert report.symmetry_defect <= 1e-10


def test_nilpotent_family_is_rejected() -> None:
    grid = TimeGrid(1.0, 4)

    report = gram_positivity_check(_nilpotent_table(grid), 0.0, np.array([0.0, 1.0]))

    assert not report.passed
    assert report.min_eigenvalue < -1e-3
    assert report.to_dict()["witnesses"]


def test_larger_tolerance_never_turns_pass_into_fail(half_fractional: Kernel, unit_grid: TimeGrid) -> None:
    table = matrix_resolvent(np.diag([-1.0, -4.0]), half_fractional, 0.0, unit_grid)
    samples = _equispaced(unit_grid, 8)

    strict = gram_positivity_check(table, 0.0, samples, tol=1e-12)
    loose = gram_positivity_check(table, 0.0, samples, tol=1e-3)

    assert not strict.passed or loose.passed


def test_diagonal_operator_agrees_with_scalar_blocks(half_fractional: Kernel, unit_grid: TimeGrid) -> None:
    table = matrix_resolvent(np.diag([-1.0, -4.0]), half_fractional, 0.0, unit_grid)
    samples = _equispaced(unit_grid, 8)
    indices = sample_indices(table, samples)

    operator_report = gram_positivity_check(table, 0.0, samples)
    scalar_minima = [
        np.linalg.eigvalsh(scalar_gram_matrix(table.matrices[:, i, i], indices, h=unit_grid.h)).min()
        for i in range(2)
    ]

    assert operator_report.min_eigenvalue == pytest.approx(min(scalar_minima), abs=1e-10)


def test_negative_lags_use_adjoint_blocks() -> None:
    grid = TimeGrid(1.0, 4)
    table = _nilpotent_table(grid)

    gram = assemble_gram(table, 0.0, np.array([0, 4]))

    assert np.array_equal(gram[2:, :2], table.matrices[4])
    assert np.array_equal(gram[:2, 2:], table.matrices[4].conj().T)


def test_off_grid_sample_is_rejected(half_fractional: Kernel, unit_grid: TimeGrid) -> None:
    table = matrix_resolvent(np.diag([-1.0]), half_fractional, 0.0, unit_grid)

    with pytest.raises(InvalidArgumentError):
        gram_positivity_check(table, 0.0, np.array([0.5 + 0.3 * unit_grid.h]))


def test_oversized_gram_matrix_is_rejected() -> None:
    grid = TimeGrid(1.0, MAX_GRAM_SIZE + 1)
    table = OperatorResolventTable(dim=1, grid=grid, matrices=np.ones((grid.n + 1, 1, 1), dtype=complex))

    with pytest.raises(InvalidArgumentError):
        gram_positivity_check(table, 0.0, grid.times)


def test_non_finite_entries_are_rejected() -> None:
    grid = TimeGrid(1.0, 4)
    matrices = np.ones((grid.n + 1, 1, 1), dtype=complex)
    matrices[2] = np.inf

    with pytest.raises(InvalidArgumentError):
        gram_positivity_check(OperatorResolventTable(1, grid, matrices), 0.0, grid.times)


@pytest.mark.parametrize("beta", [0.5, 1.5])
@pytest.mark.parametrize("operator", ["diagonal", "dirichlet"])
def test_certified_resolvents_pass_gram_check(beta: float, operator: str, unit_grid: TimeGrid) -> None:
    kernel = builtin_kernel("fractional", {"beta": beta})
    A = np.diag([-1.0, -4.0]) if operator == "diagonal" else build_discrete_elliptic(1.0, points=16).matrix
    w = verify_admissibility(kernel, 0.0).w
    table = matrix_resolvent(A, kernel, w, unit_grid)

    report = gram_positivity_check(table, w, _equispaced(unit_grid, 8))

    assert report.passed, report.to_dict()
    assert report.min_eigenvalue >= -1e-8 * report.norm
