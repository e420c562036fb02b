"""Uniform time grids shared by every solver."""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from volterra_paths.core.exceptions import InvalidArgumentError


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t_k = k*T/n on [0, T]."""

    T: float
    n: int

    def __post_init__(self) -> None:
        if not np.isfinite(self.T) or self.T <= 0:
            raise InvalidArgumentError("Horizon must be positive and finite", "T", self.T)
        if int(self.n) != self.n or self.n < 2:
            raise InvalidArgumentError("Grid needs at least two steps", "n", self.n)

    @property
    def h(self) -> float:
        return self.T / self.n

    @cached_property
    def times(self) -> np.ndarray:
        times = np.arange(self.n + 1, dtype=float) * self.h
        times[-1] = self.T
        return times

    def refine(self, factor: int = 2) -> "TimeGrid":
        """Grid on the same horizon with factor times as many steps."""
        return TimeGrid(self.T, self.n * factor)

    def index_of(self, t: float, atol: float = 1e-9) -> int:
        """
        Index of a grid point.

        Args:
            t: Time that should coincide with a grid point
            atol: Tolerance relative to the step size

        Returns:
            k with t_k == t
        """
        k = int(round(t / self.h))
        if k < 0 or k > self.n or abs(k * self.h - t) > atol * self.h:
            raise InvalidArgumentError("Time is not a grid point", "t", t)
        return k

    def to_dict(self) -> dict[str, float | int]:
        return {"T": self.T, "n": self.n}
