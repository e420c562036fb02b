"""Custom exceptions for the Volterra toolkit."""

from typing import Any


class VolterraError(Exception):
    """Base exception for all toolkit errors."""

    def __init__(self, message: str, details: dict[str, Any] | None = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def __str__(self) -> str:
        if self.details:
            return f"{self.message} | Details: {self.details}"
        return self.message


class InvalidArgumentError(VolterraError):
    """An argument lies outside the domain of an operation."""

    def __init__(
        self,
        message: str,
        argument: str | None = None,
        value: Any = None,
    ):
        super().__init__(
            message,
            details={"argument": argument, "value": value},
        )
        self.argument = argument
        self.value = value


class DimensionMismatchError(InvalidArgumentError):
    """Matrix, vector or grid shapes do not fit together."""

    def __init__(
        self,
        message: str,
        expected: Any = None,
        actual: Any = None,
    ):
        super().__init__(message, argument="shape", value={"expected": expected, "actual": actual})
        self.expected = expected
        self.actual = actual


class StepSingularityError(VolterraError):
    """The implicit diagonal term of a forward substitution is (nearly) singular."""

    def __init__(
        self,
        message: str,
        step: int,
        pivot: complex | float | None = None,
    ):
        super().__init__(
            message,
            details={"step": step, "pivot": None if pivot is None else str(pivot)},
        )
        self.step = step
        self.pivot = pivot


class QuadratureError(VolterraError):
    """Quadrature weights or kernel samples could not be formed."""

    def __init__(self, message: str, stage: str | None = None):
        super().__init__(message, details={"stage": stage})
        self.stage = stage


class IllConditionedEigenbasisError(VolterraError):
    """The eigenvector matrix is too ill-conditioned for the spectral calculus."""

    def __init__(self, message: str, condition_number: float, limit: float):
        super().__init__(
            message,
            details={"condition_number": condition_number, "limit": limit},
        )
        self.condition_number = condition_number
        self.limit = limit


class NoAngleBudgetError(VolterraError):
    """No dilation angle fits between the operator angle and the kernel sectors."""

    def __init__(self, message: str, lower: float, upper: float):
        super().__init__(message, details={"lower": lower, "upper": upper})
        self.lower = lower
        self.upper = upper


class EllipticityError(InvalidArgumentError):
    """The leading coefficient of an elliptic operator is not bounded below."""

    def __init__(self, message: str, x: float, value: float):
        super().__init__(message, argument="a(x)", value={"x": x, "a": value})
        self.x = x
        self.a_value = value


class ConfigError(VolterraError):
    """Experiment configuration could not be read or resolved."""

    def __init__(self, message: str, path: str | None = None, reason: str | None = None):
        super().__init__(message, details={"path": path, "reason": reason})
        self.path = path
        self.reason = reason
