from pathlib import Path

import numpy as np
import pytest

from tests.oracles import exponential_resolvent
from volterra_paths.core.exceptions import DimensionMismatchError, IllConditionedEigenbasisError, InvalidArgumentError
from volterra_paths.core.grid import TimeGrid
from volterra_paths.kernels.kernel import Kernel, builtin_kernel
from volterra_paths.kernels.quadrature import discretize_kernel
from volterra_paths.resolvent.operator import (
    OperatorResolventTable,
    cross_method_difference,
    matrix_resolvent,
    resolvent_residual,
    spectral_resolvent,
    spectralize,
)
from volterra_paths.utils.csv_utils import CsvHandler


def _random_operators(count: int, dim: int, seed: int) -> list[np.ndarray]:
    rng = np.random.default_rng(seed)
    operators: list[np.ndarray] = []
    while len(operators) < count:
        A = rng.standard_normal((dim, dim)) - 3.0 * np.eye(dim)
        if np.linalg.cond(np.linalg.eig(A)[1]) < 1e3:
            operators.append(A)
    return operators


def test_constant_kernel_gives_scalar_exponential(constant_one: Kernel, unit_grid: TimeGrid) -> None:
    A = np.diag([-1.0])

    table = matrix_resolvent(A, constant_one, 0.0, unit_grid)

    assert abs(table.matrices[-1, 0, 0] - np.exp(-1.0)) <= 1e-4
    assert np.array_equal(table.matrices[0], np.eye(1))


def test_constant_kernel_gives_matrix_exponential(constant_one: Kernel) -> None:
    grid = TimeGrid(1.0, 1024)
    A = np.array([[-1.0, 2.0, 0.0], [0.0, -2.0, 1.0], [0.0, 0.0, -0.5]])

    table = matrix_resolvent(A, constant_one, 0.0, grid)

    assert np.max(np.abs(table.matrices[-1] - exponential_resolvent(A, 1.0))) <= 1e-4


def test_matrix_and_spectral_methods_agree(half_fractional: Kernel) -> None:
    grid = TimeGrid(1.0, 256)
    kernel_grid = discretize_kernel(half_fractional, grid)

    for A in _random_operators(10, 4, seed=7):
        matrix = matrix_resolvent(A, half_fractional, 0.0, grid, kernel_grid=kernel_grid)
        spectral = spectral_resolvent(spectralize(A), half_fractional, 0.0, grid, kernel_grid=kernel_grid)
        diff = cross_method_difference(matrix, spectral)
        assert diff.max() <= 1e-5 * max(1.0, float(np.abs(matrix.matrices).max()))


def test_product_rule_residual_vanishes(half_fractional: Kernel, unit_grid: TimeGrid) -> None:
    A = np.array([[-1.0, 0.5], [0.0, -2.0]])

    table = matrix_resolvent(A, half_fractional, 0.0, unit_grid)

    assert resolvent_residual(table, A, half_fractional) <= 1e-10


def test_perturbed_table_is_caught_by_residual(half_fractional: Kernel, unit_grid: TimeGrid) -> None:
    A = np.diag([-1.0, -2.0])
    table = matrix_resolvent(A, half_fractional, 0.0, unit_grid)
    noise = 1e-3 * np.random.default_rng(0).standard_normal(table.matrices.shape)
    perturbed = OperatorResolventTable(dim=2, grid=unit_grid, matrices=table.matrices + noise, method="perturbed")

    assert resolvent_residual(perturbed, A, half_fractional) >= 1e-4


@pytest.mark.parametrize("name, params, ratio", [("fractional", {"beta": 0.5}, 2.0), ("constant_one", {}, 3.5)])
def test_check_rule_residual_decreases_under_refinement(name: str, params: dict[str, float], ratio: float) -> None:
    kernel = builtin_kernel(name, params)
    A = np.diag([-1.0, -4.0])

    coarse = matrix_resolvent(A, kernel, 0.0, TimeGrid(1.0, 512))
    fine = matrix_resolvent(A, kernel, 0.0, TimeGrid(1.0, 2048))

    coarse_residual = resolvent_residual(coarse, A, kernel, rule="check")
    fine_residual = resolvent_residual(fine, A, kernel, rule="check")
    assert coarse_residual / fine_residual >= ratio


def test_shifted_solve_reproduces_unshifted_resolvent(constant_one: Kernel) -> None:
    grid = TimeGrid(1.0, 1024)
    A = np.diag([-1.0, 0.5])

    plain = matrix_resolvent(A, constant_one, 0.0, grid)
    shifted = matrix_resolvent(A, constant_one, 0.0, grid, rho=1.0)

    assert np.max(np.abs(plain.matrices - shifted.matrices)) <= 1e-5
    assert np.allclose(np.diagonal(plain.matrices[-1]), np.exp([-1.0, 0.5]), atol=1e-5)


def test_damped_table_unscales_to_true_resolvent(constant_one: Kernel, unit_grid: TimeGrid) -> None:
    A = np.diag([-1.0])

    table = matrix_resolvent(A, constant_one, 2.0, unit_grid)

    assert table.unscaled().w == 0.0
    assert np.allclose(table.true_matrices()[:, 0, 0], np.exp(-unit_grid.times), atol=1e-5)


def test_jordan_block_is_not_diagonalised() -> None:
    with pytest.raises(IllConditionedEigenbasisError):
        spectralize(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_non_square_operator_is_rejected(constant_one: Kernel, unit_grid: TimeGrid) -> None:
    with pytest.raises(DimensionMismatchError):
        matrix_resolvent(np.ones((2, 3)), constant_one, 0.0, unit_grid)


def test_residual_rejects_mismatched_operator(constant_one: Kernel, unit_grid: TimeGrid) -> None:
    table = matrix_resolvent(np.diag([-1.0]), constant_one, 0.0, unit_grid)

    with pytest.raises(DimensionMismatchError):
        resolvent_residual(table, np.eye(2), constant_one)


def test_resolvent_commutes_with_operator(half_fractional: Kernel, unit_grid: TimeGrid) -> None:
    A = np.array([[-2.0, 1.0], [0.5, -1.0]])

    table = matrix_resolvent(A, half_fractional, 0.0, unit_grid)

    assert table.commutator_defect(A) <= 1e-10


def test_interpolation_between_grid_points(constant_one: Kernel) -> None:
    grid = TimeGrid(1.0, 4)
    table = matrix_resolvent(np.diag([-1.0]), constant_one, 0.0, grid)

    midpoint = table.at(0.375)

    assert np.allclose(midpoint, 0.5 * (table.matrices[1] + table.matrices[2]))
    assert np.array_equal(table.at(0.5), table.matrices[2])
    with pytest.raises(InvalidArgumentError):
        table.at(1.5)


def test_binary_export_round_trips(half_fractional: Kernel, tmp_path: Path) -> None:
    grid = TimeGrid(0.5, 32)
    A = np.array([[-1.0, 0.25], [0.0, -3.0]])
    table = matrix_resolvent(A, half_fractional, 0.5, grid)
    path = tmp_path / "resolvent.bin"

    table.to_binary(path)
    restored = OperatorResolventTable.read_binary(path)

    assert path.stat().st_size == 32 + 16 * (grid.n + 1) * 4
    assert restored.grid == grid
    assert restored.w == 0.5
    assert np.array_equal(restored.matrices, table.matrices)


def test_csv_export_lists_real_and_imaginary_parts(constant_one: Kernel, tmp_path: Path) -> None:
    grid = TimeGrid(1.0, 8)
    table = matrix_resolvent(np.diag([-1.0, -2.0]), constant_one, 0.0, grid)
    path = tmp_path / "resolvent.csv"

    table.to_csv(path)
    header, data = CsvHandler.read_table(path)

    assert header[:3] == ["t", "re_0_0", "im_0_0"]
    assert data.shape == (grid.n + 1, 1 + 2 * 4)
    assert np.array_equal(data[:, 0], grid.times)
