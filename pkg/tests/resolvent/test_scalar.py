import numpy as np
import pytest

from tests.oracles import fractional_scalar_resolvent
from volterra_paths.core.exceptions import InvalidArgumentError, StepSingularityError
from volterra_paths.core.grid import TimeGrid
from volterra_paths.kernels.kernel import Kernel, builtin_kernel
from volterra_paths.kernels.quadrature import discretize_kernel
from volterra_paths.kernels.sector import SamplingSpec, verify_admissibility
from volterra_paths.resolvent.scalar import (
    inverse_distance_bound,
    laplace_bound_check,
    scalar_resolvent,
    sector_samples,
    solve_scalar_resolvents,
)

ORACLE_STRIDE = 64


@pytest.mark.parametrize(
    "beta, tol",
    [(0.5, 1e-3), (1.0, 1e-4), (1.5, 1e-4)],
)
@pytest.mark.parametrize("mu", [1.0, 2.0 + 1.0j])
def test_fractional_resolvent_matches_mittag_leffler(beta: float, tol: float, mu: complex) -> None:
    grid = TimeGrid(1.0, 2048)
    kernel = builtin_kernel("fractional", {"beta": beta})

    table = scalar_resolvent(kernel, mu, 0.0, grid)

    times = grid.times[::ORACLE_STRIDE]
    expected = fractional_scalar_resolvent(beta, mu, times)
    assert np.max(np.abs(table.values[::ORACLE_STRIDE] - expected)) <= tol


def test_constant_kernel_resolvent_is_exponential_after_unscaling(constant_one: Kernel) -> None:
    grid = TimeGrid(2.0, 1024)

    table = scalar_resolvent(constant_one, 0.5, 1.0, grid)

    assert np.allclose(table.true_values(), np.exp(-0.5 * grid.times), atol=1e-5)
    assert table.values[0] == 1.0


def test_batched_solve_matches_single_solves(half_fractional: Kernel, unit_grid: TimeGrid) -> None:
    kernel_grid = discretize_kernel(half_fractional, unit_grid)
    mus = np.array([0.5, 1.0 + 2.0j, 3.0])

    batched = solve_scalar_resolvents(kernel_grid, mus)

    for i, mu in enumerate(mus):
        single = scalar_resolvent(half_fractional, mu, 0.0, unit_grid, kernel_grid=kernel_grid)
        assert np.allclose(batched[:, i], single.values, rtol=1e-13, atol=1e-15)


def test_singular_implicit_step_is_reported(constant_one: Kernel) -> None:
    grid = TimeGrid(1.0, 8)
    kernel_grid = discretize_kernel(constant_one, grid)
    mu = -1.0 / kernel_grid.alpha[0]

    with pytest.raises(StepSingularityError) as info:
        solve_scalar_resolvents(kernel_grid, np.array([mu]))
    assert info.value.step == 1


def test_inverse_distance_bound_saturates_at_right_angle() -> None:
    assert inverse_distance_bound(np.pi / 2) == 1.0
    assert inverse_distance_bound(np.pi / 6) == pytest.approx(2.0)


def test_laplace_bound_holds_for_certified_kernel(half_fractional: Kernel) -> None:
    cert = verify_admissibility(half_fractional, np.pi / 8)

    report = laplace_bound_check(half_fractional, cert)

    assert report.passed, report.to_dict()
    assert report.k_measured <= report.k_theory
    assert np.pi / 8 < report.psi < cert.phi


def test_laplace_bound_requires_passed_certificate() -> None:
    kernel = builtin_kernel("linear_t")
    cert = verify_admissibility(kernel, 0.0, sampling=SamplingSpec(ladder=(0.0,)))

    with pytest.raises(InvalidArgumentError):
        laplace_bound_check(kernel, cert)


def test_scalar_resolvents_stay_below_laplace_bound(half_fractional: Kernel) -> None:
    cert = verify_admissibility(half_fractional, np.pi / 8)
    bound = laplace_bound_check(half_fractional, cert)
    grid = TimeGrid(1.0, 512)
    kernel_grid = discretize_kernel(half_fractional, grid, cert.w)
    mus = sector_samples(bound.psi)

    sup_norms = [scalar_resolvent(half_fractional, mu, cert.w, grid, kernel_grid=kernel_grid).sup_norm for mu in mus]

    assert mus.size == 100
    assert max(sup_norms) <= bound.k_theory


@pytest.mark.parametrize("beta, min_ratio", [(0.5, 1.4), (1.0, 1.8), (1.5, 1.8)])
def test_halving_the_step_shrinks_mittag_leffler_error(beta: float, min_ratio: float) -> None:
    kernel = builtin_kernel("fractional", {"beta": beta})
    checkpoints = np.array([0.25, 0.5, 0.75, 1.0])
    expected = fractional_scalar_resolvent(beta, 1.0, checkpoints)

    errors = []
    for n in (256, 512):
        grid = TimeGrid(1.0, n)
        table = scalar_resolvent(kernel, 1.0, 0.0, grid)
        indices = [grid.index_of(t) for t in checkpoints]
        errors.append(float(np.max(np.abs(table.values[indices] - expected))))

    assert errors[0] / errors[1] >= min_ratio
