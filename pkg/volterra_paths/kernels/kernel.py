"""Scalar kernels with analytic Laplace data."""

from collections.abc import Callable, Mapping
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy import integrate, special

from volterra_paths.core.exceptions import InvalidArgumentError
from volterra_paths.utils.logging import get_logger

logger = get_logger(__name__)

ArrayFn = Callable[[np.ndarray], np.ndarray]

BUILTIN_KERNELS = ("fractional", "kelvin_voigt", "linear_t", "constant_one")


@dataclass(frozen=True)
class Kernel:
    """
    A scalar kernel a together with its transform data.

    Near t = 0 the kernel behaves like t**singular_exponent times a smooth
    factor; the exponent drives the product quadrature on the first cell.
    Evaluators are vectorised and hold no state.
    """

    name: str
    time_eval: ArrayFn
    laplace_eval: ArrayFn
    laplace_deriv_eval: ArrayFn
    exp_order_w0: float = 0.0
    singular_exponent: float = 0.0
    approximate: bool = False
    params: Mapping[str, float] = field(default_factory=dict, compare=False)

    @property
    def singular_at_zero(self) -> bool:
        return self.singular_exponent < 0

    def __call__(self, t: np.ndarray | float) -> np.ndarray:
        return self.time_eval(np.asarray(t, dtype=float))

    def regular_part(self, tau: np.ndarray) -> np.ndarray:
        """Smooth factor g with a(tau) = tau**singular_exponent * g(tau), for tau > 0."""
        tau = np.asarray(tau, dtype=float)
        if self.singular_exponent == 0.0:
            return self.time_eval(tau)
        return self.time_eval(tau) * tau ** (-self.singular_exponent)

    def laplace(self, lam: np.ndarray | complex) -> np.ndarray:
        return self.laplace_eval(np.asarray(lam, dtype=complex))

    def laplace_deriv(self, lam: np.ndarray | complex) -> np.ndarray:
        return self.laplace_deriv_eval(np.asarray(lam, dtype=complex))

    def describe(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "params": dict(self.params),
            "exp_order_w0": self.exp_order_w0,
            "singular_exponent": self.singular_exponent,
            "approximate": self.approximate,
        }


def _fractional(beta: float) -> Kernel:
    if not 0.0 < beta < 2.0:
        raise InvalidArgumentError("Fractional order must lie in (0, 2)", "beta", beta)
    norm = 1.0 / special.gamma(beta)

    def time_eval(t: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return norm * np.power(t, beta - 1.0)

    return Kernel(
        name="fractional",
        time_eval=time_eval,
        laplace_eval=lambda lam: np.power(lam, -beta),
        laplace_deriv_eval=lambda lam: -beta * np.power(lam, -beta - 1.0),
        singular_exponent=beta - 1.0,
        params={"beta": beta},
    )


def _kelvin_voigt(nu: float, mu: float) -> Kernel:
    if nu <= 0:
        raise InvalidArgumentError("Kelvin-Voigt viscosity must be positive", "nu", nu)
    if mu <= 0:
        raise InvalidArgumentError("Kelvin-Voigt modulus must be positive", "mu", mu)

    return Kernel(
        name="kelvin_voigt",
        time_eval=lambda t: nu + mu * t,
        laplace_eval=lambda lam: nu / lam + mu / lam**2,
        laplace_deriv_eval=lambda lam: -nu / lam**2 - 2.0 * mu / lam**3,
        params={"nu": nu, "mu": mu},
    )


def builtin_kernel(name: str, params: Mapping[str, float] | None = None) -> Kernel:
    """
    Build one of the kernels with closed-form Laplace transforms.

    Args:
        name: fractional, kelvin_voigt, linear_t or constant_one
        params: beta for fractional; nu and mu for kelvin_voigt

    Returns:
        Kernel with analytic evaluators
    """
    params = dict(params or {})

    if name == "fractional":
        return _fractional(float(params.get("beta", 0.5)))
    if name == "kelvin_voigt":
        return _kelvin_voigt(float(params.get("nu", 1.0)), float(params.get("mu", 1.0)))
    if name == "linear_t":
        return Kernel(
            name="linear_t",
            time_eval=lambda t: np.asarray(t, dtype=float).copy(),
            laplace_eval=lambda lam: lam**-2,
            laplace_deriv_eval=lambda lam: -2.0 * lam**-3,
        )
    if name == "constant_one":
        return Kernel(
            name="constant_one",
            time_eval=lambda t: np.ones_like(t, dtype=float),
            laplace_eval=lambda lam: 1.0 / lam,
            laplace_deriv_eval=lambda lam: -(lam**-2),
        )

    raise InvalidArgumentError(f"Unknown builtin kernel '{name}'", "name", name)


def _laplace_integral(g: Callable[[float], float], gamma: float, lam: complex, cutoff: float) -> complex:
    """Integral of t**gamma * g(t) * exp(-lam t) over [0, cutoff]."""
    x, y = lam.real, lam.imag
    opts: dict[str, Any] = {"epsabs": 0.0, "epsrel": 1e-11, "limit": 400}

    def head(part: Callable[[float], float]) -> float:
        head_end = min(1.0, cutoff)
        if gamma == 0.0:
            return integrate.quad(part, 0.0, head_end, **opts)[0]
        scale = head_end ** (1.0 + gamma)
        return scale * integrate.quad(
            lambda u: part(u * head_end), 0.0, 1.0, weight="alg", wvar=(gamma, 0.0), **opts
        )[0]

    def decayed(t: float) -> float:
        return float(g(t) * np.exp(-x * t))

    real = head(lambda t: decayed(t) * np.cos(y * t))
    imag = -head(lambda t: decayed(t) * np.sin(y * t))

    if cutoff > 1.0:
        def tail(t: float) -> float:
            return decayed(t) * t**gamma

        if y == 0.0:
            real += integrate.quad(tail, 1.0, cutoff, **opts)[0]
        else:
            real += integrate.quad(tail, 1.0, cutoff, weight="cos", wvar=y, **opts)[0]
            imag -= integrate.quad(tail, 1.0, cutoff, weight="sin", wvar=y, **opts)[0]

    return complex(real, imag)


def numeric_laplace(kernel: Kernel, lam: complex, derivative: bool = False) -> complex:
    """
    Laplace transform of a kernel by adaptive quadrature.

    The integral is truncated where exp(-(Re lam - w0) t) has fallen below
    exp(-60); the weak singularity at zero is handled with an algebraic weight.

    Args:
        kernel: Kernel whose time evaluator is integrated
        lam: Point with Re lam > w0
        derivative: Return the derivative of the transform instead

    Returns:
        Transform value at lam
    """
    lam = complex(lam)
    margin = lam.real - kernel.exp_order_w0
    if margin <= 0:
        raise InvalidArgumentError("Transform point must satisfy Re lam > w0", "lam", lam)

    cutoff = 1.0 + 60.0 / margin
    gamma = kernel.singular_exponent

    def g(t: float) -> float:
        value = float(kernel.regular_part(np.array([t]))[0]) if t > 0 else float(
            kernel.regular_part(np.array([1e-300]))[0]
        )
        return -t * value if derivative else value

    return _laplace_integral(g, gamma, lam, cutoff)


def numeric_kernel(
    name: str,
    time_eval: ArrayFn,
    exp_order_w0: float = 0.0,
    singular_exponent: float = 0.0,
) -> Kernel:
    """
    Kernel whose transform is computed by quadrature on every call.

    Args:
        name: Identifier
        time_eval: Vectorised a(t) for t > 0
        exp_order_w0: Exponential order of the kernel
        singular_exponent: Power of t governing the behaviour at zero

    Returns:
        Kernel flagged as approximate
    """
    logger.warning(f"Kernel '{name}' uses numerically computed Laplace transforms (slow, approximate)")

    shell = Kernel(
        name=name,
        time_eval=time_eval,
        laplace_eval=lambda lam: lam,
        laplace_deriv_eval=lambda lam: lam,
        exp_order_w0=exp_order_w0,
        singular_exponent=singular_exponent,
        approximate=True,
    )

    def transform(lam: np.ndarray) -> np.ndarray:
        flat = [numeric_laplace(shell, complex(v)) for v in np.ravel(lam)]
        return np.reshape(np.array(flat, dtype=complex), np.shape(lam))

    def transform_deriv(lam: np.ndarray) -> np.ndarray:
        flat = [numeric_laplace(shell, complex(v), derivative=True) for v in np.ravel(lam)]
        return np.reshape(np.array(flat, dtype=complex), np.shape(lam))

    return Kernel(
        name=name,
        time_eval=time_eval,
        laplace_eval=transform,
        laplace_deriv_eval=transform_deriv,
        exp_order_w0=exp_order_w0,
        singular_exponent=singular_exponent,
        approximate=True,
    )


def kernel_primitive(
    kernel: Kernel,
    d: np.ndarray | float,
    w: float = 0.0,
    nodes: int = 20,
) -> np.ndarray:
    """
    Integral of exp(-w t) a(t) over [0, d], elementwise in d.

    Gauss-Jacobi with the kernel's singular exponent as end-point weight, so
    polynomial kernels are integrated exactly.

    Args:
        kernel: Kernel to integrate
        d: Upper limits, d >= 0
        w: Exponential damping
        nodes: Quadrature nodes

    Returns:
        Array shaped like d
    """
    d = np.asarray(d, dtype=float)
    gamma = kernel.singular_exponent
    x, wts = special.roots_jacobi(nodes, 0.0, gamma)
    u = (1.0 + x) / 2.0

    flat = d.reshape(-1)
    positive = flat > 0
    result = np.zeros_like(flat)
    if np.any(positive):
        dp = flat[positive][:, None]
        tau = dp * u[None, :]
        integrand = kernel.regular_part(tau) * np.exp(-w * tau)
        scale = dp[:, 0] ** (1.0 + gamma) / 2.0 ** (1.0 + gamma)
        result[positive] = scale * (integrand @ wts)
    return result.reshape(d.shape)


@dataclass
class LaplaceConsistencyReport:
    """Agreement of analytic evaluators with quadrature and finite differences."""

    kernel: str
    lambdas: list[complex]
    max_transform_error: float
    max_derivative_error: float
    transform_tol: float
    derivative_tol: float

    @property
    def passed(self) -> bool:
        return (
            self.max_transform_error <= self.transform_tol
            and self.max_derivative_error <= self.derivative_tol
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "kernel": self.kernel,
            "lambdas": self.lambdas,
            "max_transform_error": self.max_transform_error,
            "max_derivative_error": self.max_derivative_error,
            "transform_tol": self.transform_tol,
            "derivative_tol": self.derivative_tol,
            "passed": self.passed,
        }


def laplace_consistency(
    kernel: Kernel,
    lambdas: np.ndarray,
    transform_tol: float = 1e-6,
    derivative_tol: float = 1e-4,
) -> LaplaceConsistencyReport:
    """
    Cross-check a kernel's analytic transform against quadrature.

    Args:
        kernel: Kernel to check
        lambdas: Points with Re lam > w0 + 1
        transform_tol: Relative tolerance for the transform
        derivative_tol: Relative tolerance for the derivative

    Returns:
        LaplaceConsistencyReport
    """
    lambdas = np.asarray(lambdas, dtype=complex).ravel()
    analytic = kernel.laplace(lambdas)
    numeric = np.array([numeric_laplace(kernel, lam) for lam in lambdas])
    transform_error = float(np.max(np.abs(numeric - analytic) / np.abs(analytic)))

    step = 1e-4 * np.maximum(1.0, np.abs(lambdas))
    central = (kernel.laplace(lambdas + step) - kernel.laplace(lambdas - step)) / (2.0 * step)
    deriv = kernel.laplace_deriv(lambdas)
    derivative_error = float(np.max(np.abs(central - deriv) / np.abs(deriv)))

    logger.debug(
        f"Laplace check for {kernel.name}: transform {transform_error:.2e}, "
        f"derivative {derivative_error:.2e}"
    )

    return LaplaceConsistencyReport(
        kernel=kernel.name,
        lambdas=[complex(v) for v in lambdas],
        max_transform_error=transform_error,
        max_derivative_error=derivative_error,
        transform_tol=transform_tol,
        derivative_tol=derivative_tol,
    )
