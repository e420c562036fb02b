"""Logging for the toolkit: one rich (or plain) stderr handler under the package root logger."""

import logging
import sys
from pathlib import Path
from typing import Protocol

from rich.console import Console
from rich.logging import RichHandler

ROOT_LOGGER = "volterra_paths"
DEFAULT_FORMAT = "%(asctime)s | %(levelname)-8s | %(name)s | %(message)s"

_loggers: dict[str, logging.Logger] = {}
_initialized = False


class LoggingOptions(Protocol):
    """Anything shaped like LoggingSettings."""

    @property
    def level(self) -> str: ...

    @property
    def format(self) -> str: ...

    @property
    def file(self) -> Path | None: ...

    @property
    def rich_console(self) -> bool: ...


def _stderr_handler(level: int, log_format: str, rich_console: bool) -> logging.Handler:
    handler: logging.Handler
    if rich_console:
        handler = RichHandler(
            console=Console(stderr=True),
            show_time=True,
            show_path=False,
            markup=False,
            rich_tracebacks=True,
        )
    else:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(log_format))
    handler.setLevel(level)
    return handler


def setup_logging(
    level: str = "INFO",
    log_format: str = DEFAULT_FORMAT,
    log_file: Path | None = None,
    rich_console: bool = True,
) -> None:
    """
    Route toolkit logs, and numpy/scipy warnings, to stderr and an optional file.

    Warnings such as scipy's IntegrationWarning from transform quadrature are
    captured and logged under the package root, so they honour the level and
    land in the log file with everything else.

    Args:
        level: Logging level (DEBUG, INFO, WARNING, ERROR)
        log_format: Format string for plain and file output
        log_file: Optional file receiving DEBUG and above
        rich_console: Use a RichHandler instead of a plain stream handler
    """
    global _initialized

    numeric_level = getattr(logging, level.upper())
    handlers = [_stderr_handler(numeric_level, log_format, rich_console)]
    if log_file:
        log_file.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_file, encoding="utf-8")
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(logging.Formatter(log_format))
        handlers.append(file_handler)

    root = logging.getLogger(ROOT_LOGGER)
    root.setLevel(logging.DEBUG if log_file else numeric_level)
    for old in root.handlers:
        old.close()
    root.handlers = list(handlers)

    logging.captureWarnings(True)
    warnings_logger = logging.getLogger("py.warnings")
    warnings_logger.handlers = list(handlers)
    warnings_logger.propagate = False

    _initialized = True


def configure_from(options: LoggingOptions) -> None:
    """setup_logging with the fields of a LoggingSettings instance."""
    setup_logging(
        level=options.level,
        log_format=options.format,
        log_file=options.file,
        rich_console=options.rich_console,
    )


def get_logger(name: str) -> logging.Logger:
    """
    Logger under the package root; configures default logging on first use.

    Args:
        name: Usually __name__

    Returns:
        Logger named volterra_paths.<name> unless name already carries the prefix
    """
    if not _initialized:
        setup_logging()

    if name not in _loggers:
        qualified = name if name.startswith(ROOT_LOGGER) else f"{ROOT_LOGGER}.{name}"
        _loggers[name] = logging.getLogger(qualified)
    return _loggers[name]
