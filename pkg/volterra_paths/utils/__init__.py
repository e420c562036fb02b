"""Utility modules for logging, JSON and CSV handling."""

from volterra_paths.utils.csv_utils import CsvHandler
from volterra_paths.utils.json_utils import JsonHandler
from volterra_paths.utils.logging import configure_from, get_logger, setup_logging

__all__ = [
    "setup_logging",
    "configure_from",
    "get_logger",
    "JsonHandler",
    "CsvHandler",
]
