import numpy as np
import pytest

from volterra_paths.core.exceptions import InvalidArgumentError, NoAngleBudgetError
from volterra_paths.kernels.kernel import Kernel, builtin_kernel
from volterra_paths.kernels.sector import SamplingSpec, SectorCertificate, verify_admissibility
from volterra_paths.positivity.bochner import (
    AngleBudget,
    angle_budget,
    bochner_check,
    default_tau_samples,
    default_xi_samples,
)


def _certificate(sigma: float, phi: float, passed: bool = True) -> SectorCertificate:
    return SectorCertificate(
        sigma=sigma,
        phi=phi,
        c_reg=1.0,
        w=0.0,
        rho=0.0,
        passed=passed,
        phiA_bound=0.0,
        kernel="synthetic",
    )


def test_budget_is_midpoint_of_admissible_interval() -> None:
    budget = angle_budget(np.pi / 8, _certificate(np.pi / 4, 3 * np.pi / 4))

    assert budget.upper == pytest.approx(np.pi / 4)
    assert budget.beta == pytest.approx(3 * np.pi / 16)
    assert budget.alpha == pytest.approx(3 / 8)


def test_budget_for_trivial_sector() -> None:
    budget = angle_budget(0.0, _certificate(0.0, np.pi / 2))

    assert budget.beta == pytest.approx(np.pi / 4)
    assert budget.alpha == pytest.approx(0.5)


def test_right_angle_sector_leaves_no_budget() -> None:
    with pytest.raises(NoAngleBudgetError) as info:
        angle_budget(0.0, _certificate(np.pi / 2, np.pi / 2))
    assert info.value.upper == pytest.approx(0.0)


def test_failed_certificate_leaves_no_budget() -> None:
    with pytest.raises(NoAngleBudgetError):
        angle_budget(0.0, _certificate(np.pi / 4, np.pi / 2, passed=False))


def test_linear_kernel_never_reaches_the_symbol_check() -> None:
    kernel = builtin_kernel("linear_t")
    cert = verify_admissibility(kernel, 0.0, sampling=SamplingSpec(ladder=(0.0,)))

    with pytest.raises(NoAngleBudgetError):
        angle_budget(0.0, cert)


def test_half_order_symbol_is_nonnegative(half_fractional: Kernel) -> None:
    cert = verify_admissibility(half_fractional, 0.0)
    budget = angle_budget(0.0, cert)

    report = bochner_check(half_fractional, budget, cert.w)

    assert report.passed, report.to_dict()
    assert budget.beta + cert.sigma < np.pi / 2
    assert report.n_evaluated == default_tau_samples().size * default_xi_samples().size


def test_zero_dilation_reduces_to_half_plane_symbol(half_fractional: Kernel) -> None:
    budget = AngleBudget(beta=np.pi / 8, sigma=np.pi / 4, phiA_bound=0.0, upper=np.pi / 4)
    xi = np.array([0.5, 1.0, 4.0])

    report = bochner_check(half_fractional, budget, 1.0, tau_samples=np.array([0.0]), xi_samples=xi)

    assert report.min_value == pytest.approx(np.min(1.0 / (1.0 + xi**2)))
    assert report.passed


def test_zero_frequency_on_zero_line_is_skipped(half_fractional: Kernel) -> None:
    budget = angle_budget(0.0, verify_admissibility(half_fractional, 0.0))

    report = bochner_check(half_fractional, budget, 0.0, xi_samples=np.array([0.0, 1.0]))

    assert report.n_evaluated == default_tau_samples().size


def test_negative_frequencies_are_rejected(half_fractional: Kernel) -> None:
    budget = angle_budget(0.0, verify_admissibility(half_fractional, 0.0))

    with pytest.raises(InvalidArgumentError):
        bochner_check(half_fractional, budget, 0.0, xi_samples=np.array([-1.0]))


def test_over_wide_dilation_produces_negative_symbol() -> None:
    kernel = builtin_kernel("fractional", {"beta": 1.5})
    budget = AngleBudget(beta=0.49 * np.pi, sigma=np.pi / 4, phiA_bound=0.0, upper=np.pi / 2)

    report = bochner_check(kernel, budget, 0.0)

    assert not report.passed
    assert report.violations


def test_order_three_halves_symbol_is_nonnegative() -> None:
    kernel = builtin_kernel("fractional", {"beta": 1.5})
    cert = verify_admissibility(kernel, 0.0)

    report = bochner_check(kernel, angle_budget(0.0, cert), cert.w)

    assert report.passed, report.to_dict()
    assert report.min_value >= -1e-10
