"""Deterministic JSON reports via orjson, with numpy and complex support."""

from pathlib import Path
from typing import Any

import numpy as np
import orjson

REPORT_OPTIONS = orjson.OPT_SORT_KEYS | orjson.OPT_SERIALIZE_NUMPY | orjson.OPT_INDENT_2


def _encode_extra(obj: Any) -> Any:
    """Complex numbers become [re, im]; complex arrays nest that pair innermost."""
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return np.stack([obj.real, obj.imag], axis=-1).tolist()
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, Path):
        return str(obj)
    if isinstance(obj, (set, frozenset, tuple)):
        return sorted(obj) if isinstance(obj, (set, frozenset)) else list(obj)
    raise TypeError(f"Type is not JSON serializable: {type(obj).__name__}")


class JsonHandler:
    """Reads and writes the report files."""

    @staticmethod
    def encode(data: Any) -> bytes:
        """
        Sorted-key, indented JSON with a trailing newline.

        Nothing time-dependent is added, so equal data always gives equal bytes.
        """
        return orjson.dumps(data, default=_encode_extra, option=REPORT_OPTIONS) + b"\n"

    @staticmethod
    def dump_file(data: Any, path: Path) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(JsonHandler.encode(data))

    @staticmethod
    def load_file(path: Path) -> Any:
        """
        Parse a JSON file.

        Raises:
            FileNotFoundError: Missing file
            orjson.JSONDecodeError: Malformed content
        """
        return orjson.loads(Path(path).read_bytes())

    @staticmethod
    def safe_load_file(path: Path, default: Any = None) -> Any:
        """load_file, or default when the file is missing or malformed."""
        try:
            return JsonHandler.load_file(path)
        except (OSError, orjson.JSONDecodeError):
            return default
