"""Shared fixtures."""

from collections.abc import Iterator
from pathlib import Path

import pytest

from volterra_paths.config import (
    LoggingSettings,
    RuntimeSettings,
    Settings,
    ToleranceSettings,
    configure_settings,
)
from volterra_paths.core.grid import TimeGrid
from volterra_paths.kernels.kernel import Kernel, builtin_kernel


@pytest.fixture(autouse=True)
def quiet_settings(tmp_path: Path) -> Iterator[Settings]:
    settings = Settings(
        logging=LoggingSettings(level="WARNING", rich_console=False),
        tolerances=ToleranceSettings(),
        runtime=RuntimeSettings(threads=1, output_dir=tmp_path / "volterra_out"),
    )
    configure_settings(settings)
    yield settings
    configure_settings(None)


@pytest.fixture
def half_fractional() -> Kernel:
    return builtin_kernel("fractional", {"beta": 0.5})


@pytest.fixture
def constant_one() -> Kernel:
    return builtin_kernel("constant_one")


@pytest.fixture
def unit_grid() -> TimeGrid:
    return TimeGrid(1.0, 512)
