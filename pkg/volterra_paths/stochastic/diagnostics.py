"""Jump transfer and path-regularity diagnostics for solution ensembles."""

from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any, Literal

import numpy as np

from volterra_paths.core.exceptions import DimensionMismatchError, InvalidArgumentError
from volterra_paths.stochastic.convolution import SolutionPath
from volterra_paths.stochastic.noise import MartingalePath
from volterra_paths.utils.logging import get_logger

logger = get_logger(__name__)

MIN_ENSEMBLE = 100


def modulus(h: float) -> float:
    """Continuity modulus sqrt(h log(1/h)) of Brownian paths; the log is floored at 1 for coarse steps."""
    return float(np.sqrt(h * max(np.log(1.0 / h), 1.0)))


@dataclass
class JumpTransferReport:
    """Jumps of L matched against the stored jumps of u."""

    n_jumps: int
    matched: int
    missing: list[dict[str, Any]] = field(default_factory=list)
    excess: list[dict[str, Any]] = field(default_factory=list)
    max_continuous_increment: float = 0.0

    @property
    def passed(self) -> bool:
        return self.matched == self.n_jumps and not self.missing and not self.excess

    def merge(self, other: "JumpTransferReport") -> "JumpTransferReport":
        return JumpTransferReport(
            n_jumps=self.n_jumps + other.n_jumps,
            matched=self.matched + other.matched,
            missing=(self.missing + other.missing)[:16],
            excess=(self.excess + other.excess)[:16],
            max_continuous_increment=max(self.max_continuous_increment, other.max_continuous_increment),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "n_jumps": self.n_jumps,
            "matched": self.matched,
            "match_fraction": 1.0 if self.n_jumps == 0 else self.matched / self.n_jumps,
            "missing": self.missing,
            "excess": self.excess,
            "max_continuous_increment": self.max_continuous_increment,
            "passed": self.passed,
        }


def _match_jumps(u: SolutionPath, L: MartingalePath) -> tuple[int, list[dict[str, Any]], list[dict[str, Any]]]:
    used = np.zeros(u.jump_times.size, dtype=bool)
    matched = 0
    missing: list[dict[str, Any]] = []
    for tau, size in zip(L.jump_times, L.sizes):
        candidates = np.flatnonzero((u.jump_times == tau) & ~used)
        hit = next((int(i) for i in candidates if np.array_equal(u.jump_sizes[i], size)), None)
        if hit is None:
            missing.append({"time": float(tau), "size": size})
        else:
            used[hit] = True
            matched += 1
    excess = [{"time": float(u.jump_times[i]), "size": u.jump_sizes[i]} for i in np.flatnonzero(~used)]
    return matched, missing, excess


def jump_transfer_check(u: SolutionPath, L: MartingalePath) -> JumpTransferReport:
    """
    Check that every jump of L reappears in u with identical size.

    Sizes are compared exactly; S(0) = I makes the stored jump of u equal to
    the jump of L.

    Args:
        u: Solution produced from L
        L: Driving noise

    Returns:
        JumpTransferReport
    """
    if u.dim != L.dim:
        raise DimensionMismatchError("Solution and noise dimensions differ", expected=L.dim, actual=u.dim)
    matched, missing, excess = _match_jumps(u, L)
    increments = np.linalg.norm(u.continuous_increments(), axis=1)
    return JumpTransferReport(
        n_jumps=int(L.jump_times.size),
        matched=matched,
        missing=missing[:16],
        excess=excess[:16],
        max_continuous_increment=float(increments.max()) if increments.size else 0.0,
    )


@dataclass
class RegularityReport:
    """Ensemble statistics of the solution paths on one grid."""

    mode: str
    n_paths: int
    n: int
    h: float
    max_increment: float
    normalized_increment: float
    excess_jumps: int | None
    mean_sup_norm_sq: float
    noise_energy: float | None = None

    @property
    def bdg_ratio(self) -> float | None:
        """E sup ||u||^2 divided by the noise energy, when known."""
        if self.noise_energy is None or self.noise_energy <= 0:
            return None
        return self.mean_sup_norm_sq / self.noise_energy

    @property
    def passed(self) -> bool:
        finite = np.isfinite(self.max_increment) and np.isfinite(self.mean_sup_norm_sq)
        if self.mode == "cadlag":
            return bool(finite) and self.excess_jumps == 0
        return bool(finite)

    def to_dict(self) -> dict[str, Any]:
        return {
            "mode": self.mode,
            "n_paths": self.n_paths,
            "n": self.n,
            "h": self.h,
            "max_increment": self.max_increment,
            "normalized_increment": self.normalized_increment,
            "excess_jumps": self.excess_jumps,
            "mean_sup_norm_sq": self.mean_sup_norm_sq,
            "noise_energy": self.noise_energy,
            "bdg_ratio": self.bdg_ratio,
            "passed": self.passed,
        }


def path_regularity_diagnostics(
    ensemble: Sequence[SolutionPath],
    mode: Literal["continuous", "cadlag"] = "continuous",
    noises: Sequence[MartingalePath] | None = None,
    noise_energy: float | None = None,
) -> RegularityReport:
    """
    Increment modulus, excess jumps and maximal second moment of an ensemble.

    Args:
        ensemble: Solution paths on a common grid
        mode: continuous or cadlag
        noises: Driving paths, required in cadlag mode for jump matching
        noise_energy: E||L(T)||^2 for the maximal-inequality ratio

    Returns:
        RegularityReport
    """
    if not ensemble:
        raise InvalidArgumentError("Ensemble is empty", "ensemble", 0)
    if mode not in ("continuous", "cadlag"):
        raise InvalidArgumentError(f"Unknown regularity mode '{mode}'", "mode", mode)
    if mode == "cadlag" and noises is None:
        raise InvalidArgumentError("Jump matching needs the driving paths", "noises", None)
    if noises is not None and len(noises) != len(ensemble):
        raise DimensionMismatchError("One noise path per solution path", expected=len(ensemble), actual=len(noises))
    if len(ensemble) < MIN_ENSEMBLE:
        logger.warning(f"Ensemble of {len(ensemble)} paths is below {MIN_ENSEMBLE}; statistics are rough")

    grid = ensemble[0].grid
    increments = np.array([np.linalg.norm(u.continuous_increments(), axis=1).max() for u in ensemble])
    sup_sq = np.array([np.max(np.sum(np.abs(u.values) ** 2, axis=1)) for u in ensemble])

    excess: int | None = None
    if noises is not None:
        excess = sum(len(_match_jumps(u, L)[2]) for u, L in zip(ensemble, noises))

    h = grid.h
    max_increment = float(increments.max())
    report = RegularityReport(
        mode=mode,
        n_paths=len(ensemble),
        n=grid.n,
        h=h,
        max_increment=max_increment,
        normalized_increment=max_increment / modulus(h),
        excess_jumps=excess,
        mean_sup_norm_sq=float(np.mean(sup_sq)),
        noise_energy=noise_energy,
    )
    logger.info(
        f"Regularity ({mode}, n={grid.n}): max increment {max_increment:.3e}, "
        f"E sup|u|^2 {report.mean_sup_norm_sq:.3e}, excess jumps {excess}"
    )
    return report


@dataclass
class ScalingReport:
    """
    Increment modulus across refinement levels, coarsest first.

    A continuous ensemble has a maximal increment that shrinks and a normalized
    increment max/sqrt(h log(1/h)) that stays bounded. An unrecorded jump keeps
    the maximal increment near the jump size, so its normalized increment grows
    by the full ratio of the moduli; growth beyond the square root of that
    ratio fails the check.
    """

    levels: list[int]
    steps: list[float]
    max_increments: list[float]
    normalized: list[float]

    @property
    def ratios(self) -> list[float]:
        return [a / b for a, b in zip(self.max_increments, self.max_increments[1:]) if b > 0]

    @property
    def growth_limits(self) -> list[float]:
        return [float(np.sqrt(modulus(a) / modulus(b))) for a, b in zip(self.steps, self.steps[1:])]

    @property
    def shrinking(self) -> bool:
        return all(b < a or a == b == 0.0 for a, b in zip(self.max_increments, self.max_increments[1:]))

    @property
    def bounded(self) -> bool:
        pairs = zip(self.normalized, self.normalized[1:], self.growth_limits)
        return all(b <= a * limit for a, b, limit in pairs)

    @property
    def passed(self) -> bool:
        return self.shrinking and self.bounded

    def to_dict(self) -> dict[str, Any]:
        return {
            "levels": self.levels,
            "max_increments": self.max_increments,
            "normalized": self.normalized,
            "ratios": self.ratios,
            "growth_limits": self.growth_limits,
            "shrinking": self.shrinking,
            "bounded": self.bounded,
            "passed": self.passed,
        }


def increment_scaling(reports: Sequence[RegularityReport]) -> ScalingReport:
    """Order regularity reports by grid size and compare their increment moduli."""
    ordered = sorted(reports, key=lambda r: r.n)
    return ScalingReport(
        levels=[r.n for r in ordered],
        steps=[r.h for r in ordered],
        max_increments=[r.max_increment for r in ordered],
        normalized=[r.normalized_increment for r in ordered],
    )
