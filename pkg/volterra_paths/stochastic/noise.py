"""Driving martingales: Q-Brownian motion and compensated compound Poisson noise."""

from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Literal, TypeVar

import numpy as np
from scipy import linalg

from volterra_paths.core.exceptions import DimensionMismatchError, InvalidArgumentError
from volterra_paths.core.grid import TimeGrid
from volterra_paths.utils.csv_utils import CsvHandler
from volterra_paths.utils.logging import get_logger

logger = get_logger(__name__)

T_co = TypeVar("T_co")


def first_grid_index(times: np.ndarray, h: float) -> np.ndarray:
    """Smallest k >= 1 with t_k >= tau for each jump time tau."""
    return np.maximum(np.ceil(np.asarray(times, dtype=float) / h - 1e-12).astype(int), 1)


@dataclass(frozen=True)
class JumpDistribution:
    """
    Law of the compound Poisson jump sizes, i.i.d. per component.

    rademacher and gaussian laws are mean zero; constant jumps are compensated
    explicitly by the simulator.
    """

    kind: Literal["rademacher", "gaussian", "constant"] = "rademacher"
    scale: float = 1.0

    def mean(self, dim: int) -> np.ndarray:
        if self.kind == "constant":
            return np.full(dim, self.scale)
        return np.zeros(dim)

    def second_moment(self, dim: int) -> float:
        """E|J|^2."""
        return float(dim * self.scale**2)

    def sample(self, rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
        if self.kind == "rademacher":
            return self.scale * (2.0 * rng.integers(0, 2, size=(count, dim)) - 1.0)
        if self.kind == "gaussian":
            return self.scale * rng.standard_normal((count, dim))
        if self.kind == "constant":
            return np.full((count, dim), self.scale)
        raise InvalidArgumentError(f"Unknown jump distribution '{self.kind}'", "kind", self.kind)

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "scale": self.scale}


@dataclass(frozen=True)
class NoiseSpec:
    """Brownian covariance Q and compound Poisson part of the driving noise."""

    dim: int
    brownian_covariance: np.ndarray | None = None
    poisson_rate: float = 0.0
    jump_distribution: JumpDistribution | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise InvalidArgumentError("Noise dimension must be positive", "dim", self.dim)
        if self.brownian_covariance is not None:
            Q = np.asarray(self.brownian_covariance, dtype=float)
            if Q.shape != (self.dim, self.dim):
                raise DimensionMismatchError(
                    "Covariance shape does not match the noise dimension",
                    expected=(self.dim, self.dim),
                    actual=Q.shape,
                )
        if not np.isfinite(self.poisson_rate) or self.poisson_rate < 0:
            raise InvalidArgumentError("Poisson rate must be nonnegative", "poisson_rate", self.poisson_rate)

    @property
    def has_jumps(self) -> bool:
        return self.poisson_rate > 0 and self.jump_distribution is not None

    def energy(self, T: float) -> float:
        """E||L(T)||^2 = T (tr Q + rate E|J|^2)."""
        total = 0.0
        if self.brownian_covariance is not None:
            total += float(np.trace(self.brownian_covariance))
        if self.has_jumps:
            assert self.jump_distribution is not None
            total += self.poisson_rate * self.jump_distribution.second_moment(self.dim)
        return T * total

    def to_dict(self) -> dict[str, Any]:
        return {
            "dim": self.dim,
            "brownian_covariance": None if self.brownian_covariance is None else np.asarray(self.brownian_covariance),
            "poisson_rate": self.poisson_rate,
            "jump_distribution": None if self.jump_distribution is None else self.jump_distribution.to_dict(),
            "seed": self.seed,
        }


@dataclass(frozen=True)
class MartingalePath:
    """
    Cadlag path L = continuous part + pure jumps.

    continuous_part holds the values at grid times (linear in between) and
    vanishes at 0; jump_times are sorted and lie in (0, T].
    """

    grid: TimeGrid
    continuous_part: np.ndarray
    jump_times: np.ndarray = field(default_factory=lambda: np.zeros(0))
    jump_sizes: np.ndarray | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        n, dim = self.continuous_part.shape
        if n != self.grid.n + 1:
            raise DimensionMismatchError("Path length differs from the grid", expected=self.grid.n + 1, actual=n)
        if self.jump_sizes is None:
            object.__setattr__(self, "jump_sizes", np.zeros((0, dim)))

    @property
    def dim(self) -> int:
        return int(self.continuous_part.shape[1])

    @property
    def sizes(self) -> np.ndarray:
        assert self.jump_sizes is not None
        return self.jump_sizes

    @property
    def jumps(self) -> list[tuple[float, np.ndarray]]:
        return [(float(t), s) for t, s in zip(self.jump_times, self.sizes)]

    def increments(self) -> np.ndarray:
        """Increments of the continuous part over the grid cells, shape (n, dim)."""
        return np.diff(self.continuous_part, axis=0)

    def _continuous_at(self, t: float) -> np.ndarray:
        return np.array([np.interp(t, self.grid.times, self.continuous_part[:, i]) for i in range(self.dim)])

    def value_at(self, t: float) -> np.ndarray:
        """L(t), right-continuous."""
        mask = self.jump_times <= t
        return self._continuous_at(t) + self.sizes[mask].sum(axis=0)

    def left_limit(self, t: float) -> np.ndarray:
        """L(t-)."""
        mask = self.jump_times < t
        return self._continuous_at(t) + self.sizes[mask].sum(axis=0)

    def grid_values(self) -> np.ndarray:
        """L(t_k) including every jump at or before t_k."""
        values = self.continuous_part.copy()
        for k0, size in zip(first_grid_index(self.jump_times, self.grid.h), self.sizes):
            values[k0:] += size
        return values

    def scaled(self, factor: float) -> "MartingalePath":
        return replace(self, continuous_part=factor * self.continuous_part, jump_sizes=factor * self.sizes)

    def __add__(self, other: "MartingalePath") -> "MartingalePath":
        if other.grid != self.grid or other.dim != self.dim:
            raise DimensionMismatchError(
                "Paths live on different grids",
                expected={"dim": self.dim, **self.grid.to_dict()},
                actual={"dim": other.dim, **other.grid.to_dict()},
            )
        times = np.concatenate([self.jump_times, other.jump_times])
        sizes = np.vstack([self.sizes, other.sizes])
        order = np.argsort(times, kind="mergesort")
        return MartingalePath(
            grid=self.grid,
            continuous_part=self.continuous_part + other.continuous_part,
            jump_times=times[order],
            jump_sizes=sizes[order],
            seed=self.seed,
        )

    def with_jump(self, time: float, size: np.ndarray | Sequence[float]) -> "MartingalePath":
        """Copy of the path with one deterministic jump added."""
        if not 0.0 < time <= self.grid.T:
            raise InvalidArgumentError("Jump time must lie in (0, T]", "time", time)
        size = np.asarray(size, dtype=float).reshape(1, self.dim)
        jump = MartingalePath(
            grid=self.grid,
            continuous_part=np.zeros_like(self.continuous_part),
            jump_times=np.array([float(time)]),
            jump_sizes=size,
            seed=self.seed,
        )
        return self + jump

    def to_csv(self, path: Path) -> None:
        """Rows t, L_0..L_{d-1}, is_jump; a jump time gets the post-jump value."""
        rows = [np.column_stack([self.grid.times, self.grid_values(), np.zeros(self.grid.n + 1)])]
        if self.jump_times.size:
            post = np.array([self.value_at(t) for t in self.jump_times])
            rows.append(np.column_stack([self.jump_times, post, np.ones(self.jump_times.size)]))
        table = np.vstack(rows)
        table = table[np.lexsort((table[:, -1], table[:, 0]))]
        header = ["t", *(f"L_{i}" for i in range(self.dim)), "is_jump"]
        CsvHandler.write_table(path, header, table)


def zero_path(grid: TimeGrid, dim: int, seed: int = 0) -> MartingalePath:
    return MartingalePath(grid=grid, continuous_part=np.zeros((grid.n + 1, dim)), seed=seed)


def _symmetric_factor(Q: np.ndarray, psd_tol: float) -> np.ndarray:
    Q = np.asarray(Q, dtype=float)
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        raise DimensionMismatchError("Covariance must be square", expected="(d, d)", actual=Q.shape)
    if not np.allclose(Q, Q.T, rtol=0.0, atol=psd_tol * max(np.abs(Q).max(), 1.0)):
        raise InvalidArgumentError("Covariance must be symmetric", "Q", None)

    values, vectors = linalg.eigh(0.5 * (Q + Q.T))
    norm = float(np.abs(values).max()) if values.size else 0.0
    if values.size and values.min() < -psd_tol * norm:
        raise InvalidArgumentError("Covariance is not positive semi-definite", "Q", float(values.min()))
    values = np.where(values > psd_tol * norm, values, 0.0)
    return (vectors * np.sqrt(values)[None, :]) @ vectors.T


def _brownian(Q: np.ndarray, grid: TimeGrid, rng: np.random.Generator, psd_tol: float) -> np.ndarray:
    factor = _symmetric_factor(Q, psd_tol)
    dim = factor.shape[0]
    increments = np.sqrt(grid.h) * rng.standard_normal((grid.n, dim)) @ factor.T
    return np.vstack([np.zeros((1, dim)), np.cumsum(increments, axis=0)])


def simulate_brownian(Q: np.ndarray, grid: TimeGrid, seed: int, psd_tol: float = 1e-12) -> MartingalePath:
    """
    Q-Brownian motion sampled on the grid.

    Args:
        Q: Symmetric positive semi-definite covariance
        grid: Time grid
        seed: Seed of the path
        psd_tol: Relative tolerance on negative eigenvalues of Q

    Returns:
        MartingalePath without jumps
    """
    continuous = _brownian(Q, grid, np.random.default_rng(seed), psd_tol)
    return MartingalePath(grid=grid, continuous_part=continuous, seed=seed)


def _compound_poisson(
    rate: float, jumps: JumpDistribution, grid: TimeGrid, rng: np.random.Generator, dim: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    count = int(rng.poisson(rate * grid.T))
    # 1 - U lies in (0, 1], so jump times lie in (0, T]
    times = np.sort(grid.T * (1.0 - rng.random(count)))
    sizes = jumps.sample(rng, count, dim)
    compensator = -grid.times[:, None] * rate * jumps.mean(dim)[None, :]
    return compensator, times, sizes


def simulate_compound_poisson(
    rate: float, jumps: JumpDistribution, grid: TimeGrid, seed: int, dim: int = 1
) -> MartingalePath:
    """
    Compensated compound Poisson process.

    Args:
        rate: Jump intensity
        jumps: Jump size law
        grid: Time grid
        seed: Seed of the path
        dim: Dimension

    Returns:
        MartingalePath whose continuous part is the compensator -t rate E[J]
    """
    if not np.isfinite(rate) or rate < 0:
        raise InvalidArgumentError("Poisson rate must be nonnegative", "rate", rate)
    compensator, times, sizes = _compound_poisson(rate, jumps, grid, np.random.default_rng(seed), dim)
    return MartingalePath(grid=grid, continuous_part=compensator, jump_times=times, jump_sizes=sizes, seed=seed)


def simulate_noise(spec: NoiseSpec, grid: TimeGrid, seed: int | None = None, psd_tol: float = 1e-12) -> MartingalePath:
    """
    Brownian plus compensated compound Poisson noise from one seed.

    The Brownian and Poisson streams use independent children of the seed.
    """
    seed = spec.seed if seed is None else seed
    brownian_seq, poisson_seq = np.random.SeedSequence(seed).spawn(2)

    path = zero_path(grid, spec.dim, seed)
    if spec.brownian_covariance is not None:
        continuous = _brownian(spec.brownian_covariance, grid, np.random.default_rng(brownian_seq), psd_tol)
        path = replace(path, continuous_part=continuous)
    if spec.has_jumps:
        assert spec.jump_distribution is not None
        compensator, times, sizes = _compound_poisson(
            spec.poisson_rate, spec.jump_distribution, grid, np.random.default_rng(poisson_seq), spec.dim
        )
        path = path + MartingalePath(grid=grid, continuous_part=compensator, jump_times=times, jump_sizes=sizes)
    return path


def derive_seeds(master: int, count: int) -> list[int]:
    """Per-member 64-bit seeds from a master seed via SeedSequence spawn keys."""
    return [
        int(np.random.SeedSequence(master, spawn_key=(i,)).generate_state(1, np.uint64)[0])
        for i in range(count)
    ]


def map_ordered(func: Callable[[Any], T_co], items: Sequence[Any], threads: int = 1) -> list[T_co]:
    """Apply func to items, in a thread pool when threads > 1; results keep item order."""
    if threads <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, items))


def simulate_ensemble(
    spec: NoiseSpec,
    grid: TimeGrid,
    size: int,
    master_seed: int | None = None,
    threads: int = 1,
    psd_tol: float = 1e-12,
) -> list[MartingalePath]:
    """
    Independent noise paths with seeds derived from a master seed.

    Args:
        spec: Noise specification
        grid: Time grid
        size: Number of paths
        master_seed: Master seed; spec.seed when omitted
        threads: Worker threads
        psd_tol: Covariance tolerance

    Returns:
        Paths ordered by member index
    """
    if size < 1:
        raise InvalidArgumentError("Ensemble size must be positive", "size", size)
    master = spec.seed if master_seed is None else master_seed
    seeds = derive_seeds(master, size)
    logger.info(f"Simulating {size} noise paths on n={grid.n} (master seed {master}, threads={threads})")
    return map_ordered(lambda s: simulate_noise(spec, grid, s, psd_tol), seeds, threads)
