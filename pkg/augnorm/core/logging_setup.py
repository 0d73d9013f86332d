"""Logging configuration for augnorm command-line runs.

Library modules only call ``logging.getLogger(__name__)``; the CLI installs
a Rich handler on stderr once per process. The level is resolved from the
command line, then ``AUGNORM_LOG_LEVEL``, then the config file.
"""

from __future__ import annotations

import logging
import os
from typing import Literal, cast

from rich.logging import RichHandler

Verbosity = Literal["debug", "info", "warning", "error"]

LOG_LEVEL_ENV = "AUGNORM_LOG_LEVEL"

_LEVEL_MAP: dict[str, int] = {
    "debug": logging.DEBUG,
    "info": logging.INFO,
    "warning": logging.WARNING,
    "error": logging.ERROR,
}


def resolve_verbosity(cli_value: str | None, config_value: Verbosity = "info") -> Verbosity:
    """Pick the effective verbosity.

    Args:
        cli_value: Value passed on the command line, if any.
        config_value: Value from the loaded configuration.

    Returns:
        One of debug, info, warning, error. Unknown values fall back to the
        config value.
    """
    for candidate in (cli_value, os.getenv(LOG_LEVEL_ENV)):
        if candidate is None:
            continue
        text = candidate.strip().lower()
        if text in _LEVEL_MAP:
            return cast(Verbosity, text)
    return config_value


def setup_logging(
    verbosity: Verbosity = "info",
    log_to_file: bool = False,
    log_file_path: str | None = None,
) -> logging.Logger:
    """Configure the root logger with a Rich stderr handler.

    Args:
        verbosity: Console verbosity level (debug, info, warning, error)
        log_to_file: Whether to also log to a file (default: False)
        log_file_path: Path for file logging (if log_to_file=True)

    Returns:
        Configured root logger instance
    """
    log_level = _LEVEL_MAP.get(verbosity, logging.INFO)

    root_logger = logging.getLogger()
    root_logger.setLevel(logging.DEBUG)

    # Avoid duplicate handlers on re-initialization
    root_logger.handlers.clear()

    rich_handler = RichHandler(
        console=None,
        show_time=True,
        show_level=True,
        show_path=False,
        markup=False,
        rich_tracebacks=True,
        tracebacks_show_locals=False,
    )
    rich_handler.setLevel(log_level)
    rich_handler.setFormatter(logging.Formatter("%(message)s", datefmt="[%X]"))
    root_logger.addHandler(rich_handler)

    if log_to_file and log_file_path:
        try:
            file_handler = logging.FileHandler(log_file_path, mode="a", encoding="utf-8")
            file_handler.setLevel(logging.DEBUG)
            file_handler.setFormatter(
                logging.Formatter(
                    "%(asctime)s | %(levelname)-8s | %(name)s | %(message)s",
                    datefmt="%Y-%m-%d %H:%M:%S",
                )
            )
            root_logger.addHandler(file_handler)
        except (OSError, TypeError, ValueError) as e:
            root_logger.warning(f"Failed to setup file logging: {e}")

    return root_logger
