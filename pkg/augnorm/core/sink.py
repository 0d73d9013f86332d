"""Report writers (sinks) for metric rows, training traces and curves.

Supports:
- CSV (default): header from the first row's keys
- JSONL: One JSON object per line
- YAML: One YAML document per row
"""

from __future__ import annotations

import csv
import json
import logging
import math
from collections.abc import Iterable
from pathlib import Path
from typing import Any, Literal, TextIO

import yaml

from augnorm.core.errors import SinkError

logger = logging.getLogger(__name__)

SinkFormat = Literal["csv", "jsonl", "yaml"]
Row = dict[str, Any]


def _plain(value: Any) -> Any:
    """Convert numpy scalars to builtins; NaN becomes None for JSON/YAML."""
    if hasattr(value, "item") and callable(value.item):
        value = value.item()
    if isinstance(value, float) and math.isnan(value):
        return None
    return value


class BaseSink:
    """Abstract base for row sinks."""

    def __init__(self, path: Path | str) -> None:
        """Initialize sink.

        Args:
            path: Output file; parent directories are created.

        Raises:
            SinkError: If the parent directory cannot be created.
        """
        self.path = Path(path)
        self._file_handle: TextIO | None = None
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise SinkError(f"Failed to create report directory {self.path.parent}: {e}") from e

    def _ensure_file_open(self) -> TextIO:
        if self._file_handle is None:
            try:
                self._file_handle = open(self.path, "w", encoding="utf-8", newline="")
            except OSError as e:
                raise SinkError(f"Failed to open report file {self.path}: {e}") from e
        return self._file_handle

    def write_row(self, row: Row) -> None:
        """Write one record.

        Args:
            row: Column name to value mapping.
        """
        raise NotImplementedError

    def write_rows(self, rows: Iterable[Row]) -> None:
        for row in rows:
            self.write_row(row)

    def flush(self) -> None:
        """Flush buffered data."""
        if self._file_handle is not None:
            self._file_handle.flush()

    def close(self) -> None:
        """Close file handle."""
        if self._file_handle is not None:
            self._file_handle.close()
            self._file_handle = None

    def __enter__(self) -> BaseSink:
        self._ensure_file_open()
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.close()


class CSVSink(BaseSink):
    """CSV sink; the column set is fixed by the first row."""

    def __init__(self, path: Path | str, fieldnames: list[str] | None = None) -> None:
        super().__init__(path)
        self.fieldnames = fieldnames
        self._writer: csv.DictWriter[str] | None = None

    def write_row(self, row: Row) -> None:
        try:
            handle = self._ensure_file_open()
            if self._writer is None:
                self.fieldnames = self.fieldnames or list(row.keys())
                self._writer = csv.DictWriter(handle, fieldnames=self.fieldnames)
                self._writer.writeheader()
            self._writer.writerow({k: _plain(v) for k, v in row.items()})
        except SinkError:
            raise
        except (OSError, TypeError, ValueError) as e:
            raise SinkError(f"Failed to write row to {self.path}: {e}") from e


class JSONLSink(BaseSink):
    """JSONL (newline-delimited JSON) sink."""

    def write_row(self, row: Row) -> None:
        try:
            handle = self._ensure_file_open()
            json.dump({k: _plain(v) for k, v in row.items()}, handle, separators=(",", ":"))
            handle.write("\n")
        except SinkError:
            raise
        except (OSError, TypeError, ValueError) as e:
            raise SinkError(f"Failed to write row to {self.path}: {e}") from e


class YAMLSink(BaseSink):
    """YAML sink, one document per row."""

    def write_row(self, row: Row) -> None:
        try:
            handle = self._ensure_file_open()
            yaml.safe_dump(
                {k: _plain(v) for k, v in row.items()},
                handle,
                default_flow_style=False,
                sort_keys=False,
                explicit_start=True,
            )
        except SinkError:
            raise
        except (OSError, TypeError, ValueError, yaml.YAMLError) as e:
            raise SinkError(f"Failed to write row to {self.path}: {e}") from e


def create_sink(format_type: SinkFormat, path: Path | str) -> BaseSink:
    """Factory function to create appropriate sink.

    Args:
        format_type: Type of sink to create.
        path: Output file.

    Returns:
        Configured sink instance.

    Raises:
        SinkError: If format_type is unknown.
    """
    if format_type == "csv":
        return CSVSink(path)
    elif format_type == "jsonl":
        return JSONLSink(path)
    elif format_type == "yaml":
        return YAMLSink(path)
    else:
        raise SinkError(f"Unknown sink format: {format_type}")


def write_report(rows: Iterable[Row], path: Path | str) -> Path:
    """Write all rows with the sink matching the file suffix."""
    path = Path(path)
    formats: dict[str, SinkFormat] = {".csv": "csv", ".jsonl": "jsonl", ".yaml": "yaml", ".yml": "yaml"}
    format_type = formats.get(path.suffix)
    if format_type is None:
        raise SinkError(f"Unsupported report extension: {path.suffix}")
    with create_sink(format_type, path) as sink:
        sink.write_rows(rows)
    logger.debug(f"Wrote report {path}")
    return path
