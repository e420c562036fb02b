import numpy as np
import pytest

from tests.oracles import dirichlet_laplacian_eigenvalues
from volterra_paths.core.exceptions import EllipticityError, InvalidArgumentError
from volterra_paths.resolvent.elliptic import build_discrete_elliptic, choose_shift, operator_angle


def test_dirichlet_laplacian_spectrum_matches_closed_form() -> None:
    op = build_discrete_elliptic(1.0, points=16)

    eigenvalues = np.sort(np.linalg.eigvalsh(op.matrix))

    assert op.dim == 16
    assert op.h == pytest.approx(np.pi / 17)
    assert np.allclose(eigenvalues, dirichlet_laplacian_eigenvalues(16), rtol=1e-10)
    assert op.rho == pytest.approx(dirichlet_laplacian_eigenvalues(16)[-1], rel=1e-10)


def test_periodic_operator_annihilates_constants() -> None:
    op = build_discrete_elliptic(2.0, b=0.5, points=12, boundary="periodic")

    assert np.allclose(op.matrix @ np.ones(12), 0.0, atol=1e-10)
    assert op.matrix[0, -1] != 0.0


def test_variable_coefficient_must_stay_positive() -> None:
    with pytest.raises(EllipticityError) as info:
        build_discrete_elliptic(lambda x: np.cos(x), points=16)
    assert info.value.a_value <= 0


def test_unknown_boundary_is_rejected() -> None:
    with pytest.raises(InvalidArgumentError):
        build_discrete_elliptic(1.0, boundary="neumann")  # type: ignore[arg-type]


def test_symmetric_dissipative_operator_has_zero_angle() -> None:
    A = build_discrete_elliptic(1.0, points=16).matrix

    angle = operator_angle(A)

    assert angle.field_angle == pytest.approx(0.0, abs=1e-8)
    assert angle.spectral_angle == pytest.approx(0.0, abs=1e-8)
    assert angle.dissipative
    assert angle.numerical_abscissa < 0


def test_zero_operator_has_zero_angle() -> None:
    assert operator_angle(np.zeros((3, 3))).field_angle == 0.0


def test_normal_operator_angle_is_eigenvalue_argument() -> None:
    A = np.array([[-1.0, 5.0], [-5.0, -1.0]])

    angle = operator_angle(A)

    assert angle.field_angle == pytest.approx(np.arctan(5.0), abs=1e-6)


def test_operator_with_growth_is_not_sectorial() -> None:
    angle = operator_angle(np.diag([1.0, -1.0]))

    assert angle.field_angle == pytest.approx(np.pi)
    assert not angle.dissipative


def test_shift_ladder_finds_smallest_sufficient_shift() -> None:
    A = np.array([[0.0, 5.0], [-5.0, 0.0]])

    rho, angle = choose_shift(A, np.pi / 4)

    assert rho == 8.0
    assert angle.field_angle < np.pi / 4
    assert angle.rho == 8.0
