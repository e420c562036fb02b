import numpy as np
import pytest
from scipy import special

from volterra_paths.core.exceptions import InvalidArgumentError
from volterra_paths.kernels.kernel import (
    Kernel,
    builtin_kernel,
    kernel_primitive,
    laplace_consistency,
    numeric_kernel,
    numeric_laplace,
)

LAMBDAS = np.array([0.5, 1.0, 2.0 + 3.0j, 10.0 - 5.0j, 1.0 + 50.0j])


def test_fractional_kernel_matches_power_law() -> None:
    kernel = builtin_kernel("fractional", {"beta": 0.5})

    t = np.array([0.25, 1.0, 4.0])
    expected = t**-0.5 / special.gamma(0.5)

    assert np.allclose(kernel(t), expected, rtol=1e-14)
    assert kernel.singular_at_zero
    assert np.allclose(kernel.regular_part(t), 1.0 / special.gamma(0.5))


def test_fractional_order_outside_range_is_rejected() -> None:
    with pytest.raises(InvalidArgumentError):
        builtin_kernel("fractional", {"beta": 2.0})


def test_unknown_kernel_name_is_rejected() -> None:
    with pytest.raises(InvalidArgumentError) as info:
        builtin_kernel("gaussian")
    assert info.value.argument == "name"


def test_kelvin_voigt_requires_positive_parameters() -> None:
    with pytest.raises(InvalidArgumentError):
        builtin_kernel("kelvin_voigt", {"nu": 0.0, "mu": 1.0})


@pytest.mark.parametrize(
    "name, params",
    [
        ("fractional", {"beta": 0.5}),
        ("fractional", {"beta": 1.5}),
        ("kelvin_voigt", {"nu": 1.0, "mu": 1.0}),
        ("linear_t", {}),
        ("constant_one", {}),
    ],
)
def test_closed_form_transforms_agree_with_quadrature(name: str, params: dict[str, float]) -> None:
    kernel = builtin_kernel(name, params)

    report = laplace_consistency(kernel, LAMBDAS)

    assert report.passed, report.to_dict()
    assert report.to_dict()["kernel"] == name


@pytest.mark.parametrize("name", ["fractional", "kelvin_voigt", "linear_t", "constant_one"])
def test_transforms_agree_at_random_points(name: str) -> None:
    rng = np.random.default_rng(2024)
    lambdas = rng.uniform(1.0, 10.0, 20) + 1j * rng.uniform(-10.0, 10.0, 20)

    report = laplace_consistency(builtin_kernel(name), lambdas)

    assert report.passed, report.to_dict()


def test_wrong_transform_is_caught_by_consistency_check() -> None:
    honest = builtin_kernel("constant_one")
    broken = Kernel(
        name="broken",
        time_eval=honest.time_eval,
        laplace_eval=lambda lam: 1.0 / (lam + 0.1),
        laplace_deriv_eval=honest.laplace_deriv_eval,
    )

    report = laplace_consistency(broken, LAMBDAS)

    assert not report.passed
    assert report.max_transform_error > 1e-3


def test_numeric_laplace_rejects_points_left_of_exponential_order() -> None:
    kernel = builtin_kernel("constant_one")

    with pytest.raises(InvalidArgumentError):
        numeric_laplace(kernel, -0.5 + 1.0j)


def test_numeric_kernel_reproduces_exponential_transform() -> None:
    kernel = numeric_kernel("decay", lambda t: np.exp(-t))

    values = kernel.laplace(np.array([2.0, 1.0 + 3.0j]))

    assert kernel.approximate
    assert np.allclose(values, 1.0 / (np.array([2.0, 1.0 + 3.0j]) + 1.0), rtol=1e-8)


def test_primitive_of_fractional_kernel_is_exact() -> None:
    kernel = builtin_kernel("fractional", {"beta": 0.5})
    d = np.array([0.0, 1e-6, 0.3, 2.0])

    primitive = kernel_primitive(kernel, d)

    assert np.allclose(primitive, d**0.5 / special.gamma(1.5), rtol=1e-12, atol=0.0)


def test_primitive_of_kelvin_voigt_kernel_with_damping() -> None:
    kernel = builtin_kernel("kelvin_voigt", {"nu": 2.0, "mu": 3.0})
    d = 1.5
    w = 0.7

    primitive = float(kernel_primitive(kernel, d, w=w))
    # int_0^d (2 + 3t) exp(-w t) dt
    expected = 2.0 * (1 - np.exp(-w * d)) / w + 3.0 * (1 - np.exp(-w * d) * (1 + w * d)) / w**2

    assert primitive == pytest.approx(expected, rel=1e-12)


def test_describe_reports_parameters() -> None:
    kernel = builtin_kernel("kelvin_voigt", {"nu": 1.0, "mu": 2.0})

    description = kernel.describe()

    assert description["params"] == {"nu": 1.0, "mu": 2.0}
    assert description["approximate"] is False
