import logging
from pathlib import Path

from volterra_paths.config import LoggingSettings
from volterra_paths.utils.logging import ROOT_LOGGER, configure_from, get_logger, setup_logging


def test_log_file_receives_debug_records(tmp_path: Path) -> None:
    log_file = tmp_path / "logs" / "run.log"
    configure_from(LoggingSettings(level="WARNING", rich_console=False, file=log_file))

    get_logger("tests.file").debug("resolvent residual 1.0e-12")

    for handler in logging.getLogger(ROOT_LOGGER).handlers:
        handler.flush()
    assert "resolvent residual 1.0e-12" in log_file.read_text(encoding="utf-8")
    setup_logging(level="WARNING", rich_console=False)


def test_loggers_live_under_package_root() -> None:
    assert get_logger("volterra_paths.kernels").name == "volterra_paths.kernels"
    assert get_logger("scratch").name == f"{ROOT_LOGGER}.scratch"


def test_console_level_filters_info() -> None:
    setup_logging(level="ERROR", rich_console=False)

    root = logging.getLogger(ROOT_LOGGER)

    assert root.level == logging.ERROR
    assert len(root.handlers) == 1
    setup_logging(level="WARNING", rich_console=False)
