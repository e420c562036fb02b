"""Plot-ready CSV output with full float precision."""

from pathlib import Path

import numpy as np

FLOAT_FORMAT = "%.17g"


class CsvHandler:
    """Writes and reads numeric tables as comma-separated text."""

    @staticmethod
    def write_table(path: Path, header: list[str], data: np.ndarray) -> None:
        """
        Write a 2-D real array with a header row.

        Args:
            path: Destination file
            header: Column names, one per column of data
            data: Array of shape (rows, len(header))
        """
        data = np.atleast_2d(np.asarray(data, dtype=float))
        if data.shape[1] != len(header):
            raise ValueError(f"{len(header)} column names for {data.shape[1]} columns")

        path.parent.mkdir(parents=True, exist_ok=True)
        np.savetxt(
            path,
            data,
            fmt=FLOAT_FORMAT,
            delimiter=",",
            header=",".join(header),
            comments="",
        )

    @staticmethod
    def read_table(path: Path) -> tuple[list[str], np.ndarray]:
        """
        Read a table written by write_table.

        Args:
            path: Source file

        Returns:
            Header names and the data array
        """
        with open(path, encoding="utf-8") as f:
            header = f.readline().strip().split(",")
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return header, data
