"""Configuration management: runtime settings and experiment configs."""

from pathlib import Path
from typing import Annotated, Any, Literal, get_args

import numpy as np
import orjson
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from volterra_paths.core.exceptions import ConfigError
from volterra_paths.core.grid import TimeGrid
from volterra_paths.kernels.kernel import Kernel, builtin_kernel
from volterra_paths.kernels.sector import DEFAULT_LADDER, SamplingSpec
from volterra_paths.resolvent.elliptic import build_discrete_elliptic
from volterra_paths.stochastic.noise import JumpDistribution, NoiseSpec
from volterra_paths.utils.json_utils import JsonHandler


class LoggingSettings(BaseSettings):
    """Logging configuration."""

    model_config = SettingsConfigDict(env_prefix="LOG_")

    level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = Field(
        default="INFO",
        description="Logging level",
    )
    format: str = Field(
        default="%(message)s",
        description="Log message format",
    )
    file: Path | None = Field(
        default=None,
        description="Log file path (None for console only)",
    )
    rich_console: bool = Field(
        default=True,
        description="Use rich console for prettier output",
    )


class ToleranceSettings(BaseSettings):
    """Pass/fail thresholds of every numerical check."""

    model_config = SettingsConfigDict(env_prefix="VOLTERRA_TOL_")

    laplace_rel: float = Field(default=1e-6, description="Closed-form vs numeric Laplace transform")
    derivative_rel: float = Field(default=1e-4, description="Transform derivative vs finite difference")
    sector_slack: float = Field(default=1e-10, description="Slack on sector inequalities")
    gram_rel: float = Field(default=1e-8, description="Gram eigenvalue tolerance relative to ||G||")
    bochner: float = Field(default=1e-10, description="Allowed negativity of the Bochner symbol")
    resolvent_residual: float = Field(default=1e-10, description="Product-rule resolvent residual")
    weak_residual: float = Field(default=5e-3, description="Weak-solution identity defect")
    cross_method: float = Field(default=1e-6, description="Matrix vs spectral resolvent difference")
    eigenbasis_condition: float = Field(default=1e8, description="Largest accepted cond(V)")
    covariance_psd: float = Field(default=1e-12, description="Relative PSD tolerance for Q")
    bound_check: float = Field(default=1e-8, description="Slack of the Laplace bound check")


class RuntimeSettings(BaseSettings):
    """Execution settings."""

    model_config = SettingsConfigDict(env_prefix="VOLTERRA_")

    threads: int = Field(default=1, ge=1, description="Worker threads for ensembles")
    output_dir: Path = Field(default=Path("./volterra_out"), description="Default report directory")


class Settings(BaseSettings):
    """Main application settings."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    logging: LoggingSettings = Field(default_factory=LoggingSettings)
    tolerances: ToleranceSettings = Field(default_factory=ToleranceSettings)
    runtime: RuntimeSettings = Field(default_factory=RuntimeSettings)

    @classmethod
    def from_env(cls) -> "Settings":
        """Load settings from environment variables and .env file."""
        return cls(
            logging=LoggingSettings(),
            tolerances=ToleranceSettings(),
            runtime=RuntimeSettings(),
        )


# Global settings instance (lazy loaded)
_settings: Settings | None = None


def get_settings() -> Settings:
    """Get the global settings instance."""
    global _settings
    if _settings is None:
        _settings = Settings.from_env()
    return _settings


def configure_settings(settings: Settings | None) -> None:
    """Override the global settings instance; None reloads from the environment on next use."""
    global _settings
    _settings = settings


class _Spec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


# Kernels


class FractionalKernelSpec(_Spec):
    type: Literal["fractional"]
    beta: float = Field(gt=0.0, lt=2.0)

    def build(self) -> Kernel:
        return builtin_kernel("fractional", {"beta": self.beta})


class KelvinVoigtKernelSpec(_Spec):
    type: Literal["kelvin_voigt"]
    nu: float = Field(gt=0.0)
    mu: float = Field(gt=0.0)

    def build(self) -> Kernel:
        return builtin_kernel("kelvin_voigt", {"nu": self.nu, "mu": self.mu})


class LinearKernelSpec(_Spec):
    type: Literal["linear_t"]

    def build(self) -> Kernel:
        return builtin_kernel("linear_t")


class ConstantKernelSpec(_Spec):
    type: Literal["constant_one"]

    def build(self) -> Kernel:
        return builtin_kernel("constant_one")


KernelSpec = Annotated[
    FractionalKernelSpec | KelvinVoigtKernelSpec | LinearKernelSpec | ConstantKernelSpec,
    Field(discriminator="type"),
]


# Operators


class DiagonalOperatorSpec(_Spec):
    type: Literal["diagonal"]
    entries: list[float] = Field(min_length=1)

    def build(self) -> np.ndarray:
        return np.diag(np.asarray(self.entries, dtype=float))


class MatrixOperatorSpec(_Spec):
    type: Literal["matrix"]
    entries: list[list[float]] = Field(min_length=1)
    imag: list[list[float]] | None = None

    @model_validator(mode="after")
    def _square(self) -> "MatrixOperatorSpec":
        d = len(self.entries)
        if any(len(row) != d for row in self.entries):
            raise ValueError("operator matrix must be square")
        if self.imag is not None and (len(self.imag) != d or any(len(row) != d for row in self.imag)):
            raise ValueError("imaginary part must have the shape of the real part")
        return self

    def build(self) -> np.ndarray:
        real = np.asarray(self.entries, dtype=float)
        if self.imag is None:
            return real
        return real + 1j * np.asarray(self.imag, dtype=float)


class MatrixFileOperatorSpec(_Spec):
    """Matrix stored as .npy or comma-separated text."""

    type: Literal["matrix_file"]
    path: Path

    @field_validator("path")
    @classmethod
    def _exists(cls, value: Path) -> Path:
        if not value.is_file():
            raise ValueError(f"matrix file {value} does not exist")
        return value

    def build(self) -> np.ndarray:
        if self.path.suffix == ".npy":
            matrix = np.load(self.path, allow_pickle=False)
        else:
            matrix = np.loadtxt(self.path, delimiter=",", ndmin=2)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ConfigError("Matrix file does not hold a square matrix", str(self.path), f"shape {matrix.shape}")
        return matrix


class EllipticOperatorSpec(_Spec):
    """Constant-coefficient a u'' + b u' + c u on an interval."""

    type: Literal["elliptic"]
    a: float = Field(default=1.0, gt=0.0)
    b: float = 0.0
    c: float = 0.0
    points: int = Field(default=16, ge=3)
    interval: tuple[float, float] = (0.0, float(np.pi))
    boundary: Literal["dirichlet", "periodic"] = "dirichlet"

    def build(self) -> np.ndarray:
        return build_discrete_elliptic(
            self.a, self.b, self.c, points=self.points, interval=self.interval, boundary=self.boundary
        ).matrix


OperatorSpec = Annotated[
    DiagonalOperatorSpec | MatrixOperatorSpec | MatrixFileOperatorSpec | EllipticOperatorSpec,
    Field(discriminator="type"),
]


# Grid, noise, sampling, tolerances


class GridConfig(_Spec):
    T: float = Field(default=1.0, gt=0.0)
    n: int = Field(default=512, ge=2)

    def build(self) -> TimeGrid:
        return TimeGrid(self.T, self.n)


class JumpDistributionConfig(_Spec):
    kind: Literal["rademacher", "gaussian", "constant"] = "rademacher"
    scale: float = Field(default=1.0, gt=0.0)


class NoiseConfig(_Spec):
    brownian_covariance: list[list[float]] | None = None
    poisson_rate: float = Field(default=0.0, ge=0.0)
    jump_distribution: JumpDistributionConfig | None = None

    def build(self, dim: int, seed: int) -> NoiseSpec:
        jumps = None
        if self.jump_distribution is not None:
            jumps = JumpDistribution(kind=self.jump_distribution.kind, scale=self.jump_distribution.scale)
        elif self.poisson_rate > 0:
            jumps = JumpDistribution()
        Q = None if self.brownian_covariance is None else np.asarray(self.brownian_covariance, dtype=float)
        return NoiseSpec(dim=dim, brownian_covariance=Q, poisson_rate=self.poisson_rate, jump_distribution=jumps, seed=seed)


class SamplingConfig(_Spec):
    r_min: float = Field(default=1e-4, gt=0.0)
    r_max: float = Field(default=1e4, gt=0.0)
    n_moduli: int = Field(default=64, ge=1)
    n_angles: int = Field(default=65, ge=1)
    ladder: list[float] = Field(default_factory=lambda: list(DEFAULT_LADDER), min_length=1)

    def build(self) -> SamplingSpec:
        return SamplingSpec(
            r_min=self.r_min,
            r_max=self.r_max,
            n_moduli=self.n_moduli,
            n_angles=self.n_angles,
            ladder=tuple(self.ladder),
        )


class ToleranceOverrides(_Spec):
    """Per-experiment overrides of ToleranceSettings."""

    laplace_rel: float | None = None
    derivative_rel: float | None = None
    sector_slack: float | None = None
    gram_rel: float | None = None
    bochner: float | None = None
    resolvent_residual: float | None = None
    weak_residual: float | None = None
    cross_method: float | None = None
    eigenbasis_condition: float | None = None
    covariance_psd: float | None = None
    bound_check: float | None = None

    def apply(self, base: ToleranceSettings) -> ToleranceSettings:
        updates = {k: v for k, v in self.model_dump().items() if v is not None}
        return base.model_copy(update=updates)


CheckName = Literal[
    "laplace",
    "certificate",
    "bound",
    "resolvent",
    "cross_method",
    "gram",
    "bochner",
    "weak_residual",
    "jump_transfer",
    "regularity",
]
ALL_CHECKS: tuple[str, ...] = get_args(CheckName)


class ExperimentConfig(_Spec):
    """One JSON document shared by every subcommand."""

    kernel: KernelSpec
    operator: OperatorSpec | None = None
    grid: GridConfig = Field(default_factory=GridConfig)
    noise: NoiseConfig = Field(default_factory=NoiseConfig)
    ensemble_size: int = Field(default=100, ge=1)
    u0: list[float] | None = None
    checks: list[CheckName] = Field(default_factory=lambda: list(ALL_CHECKS))
    output_dir: Path | None = None
    seed: int = Field(default=0, ge=0)
    phiA_bound: float | None = Field(default=None, ge=0.0, lt=float(np.pi / 2))
    rho: float | None = None
    w: float | None = None
    sampling: SamplingConfig = Field(default_factory=SamplingConfig)
    tolerances: ToleranceOverrides = Field(default_factory=ToleranceOverrides)
    positivity_samples: int = Field(default=8, ge=1)
    regularity_mode: Literal["continuous", "cadlag"] | None = None
    convolution_method: Literal["fft", "direct"] = "fft"

    @model_validator(mode="after")
    def _dimensions(self) -> "ExperimentConfig":
        dims: dict[str, int] = {}
        operator_dim = self._operator_dim()
        if operator_dim is not None:
            dims["operator"] = operator_dim
        if self.u0 is not None:
            dims["u0"] = len(self.u0)
        if self.noise.brownian_covariance is not None:
            dims["noise"] = len(self.noise.brownian_covariance)
        if len(set(dims.values())) > 1:
            raise ValueError(f"inconsistent dimensions {dims}")
        return self

    def operator_matrix(self) -> np.ndarray:
        """Operator matrix; the zero matrix of the noise/u0 dimension when absent."""
        if self.operator is not None:
            return self.operator.build()
        return np.zeros((self.dim, self.dim))

    def _operator_dim(self) -> int | None:
        if isinstance(self.operator, DiagonalOperatorSpec | MatrixOperatorSpec):
            return len(self.operator.entries)
        if isinstance(self.operator, EllipticOperatorSpec):
            return self.operator.points
        if isinstance(self.operator, MatrixFileOperatorSpec):
            return int(self.operator.build().shape[0])
        return None

    @property
    def dim(self) -> int:
        operator_dim = self._operator_dim()
        if operator_dim is not None:
            return operator_dim
        if self.u0 is not None:
            return len(self.u0)
        if self.noise.brownian_covariance is not None:
            return len(self.noise.brownian_covariance)
        return 1

    def initial_value(self) -> np.ndarray:
        return np.zeros(self.dim) if self.u0 is None else np.asarray(self.u0, dtype=float)

    def effective_tolerances(self, base: ToleranceSettings | None = None) -> ToleranceSettings:
        return self.tolerances.apply(base or get_settings().tolerances)

    def enabled(self, check: str) -> bool:
        return check in self.checks

    def to_dict(self) -> dict[str, Any]:
        return self.model_dump(mode="json")


def load_experiment_config(path: Path) -> ExperimentConfig:
    """
    Read and validate an experiment config.

    Relative matrix-file paths are resolved against the config's directory.

    Args:
        path: JSON file

    Returns:
        ExperimentConfig

    Raises:
        ConfigError: Missing file, malformed JSON or schema violation
    """
    path = Path(path)
    try:
        raw = JsonHandler.load_file(path)
    except FileNotFoundError as e:
        raise ConfigError("Config file not found", str(path), "missing") from e
    except orjson.JSONDecodeError as e:
        raise ConfigError("Config file is not valid JSON", str(path), str(e)) from e

    if not isinstance(raw, dict):
        raise ConfigError("Config must be a JSON object", str(path), type(raw).__name__)

    operator = raw.get("operator")
    if isinstance(operator, dict) and operator.get("type") == "matrix_file" and "path" in operator:
        matrix_path = Path(operator["path"])
        if not matrix_path.is_absolute():
            raw = {**raw, "operator": {**operator, "path": str(path.parent / matrix_path)}}

    try:
        return ExperimentConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigError("Config does not match the schema", str(path), str(e)) from e
