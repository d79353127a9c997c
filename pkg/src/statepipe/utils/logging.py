"""Logging utilities."""

import logging
from pathlib import Path

PACKAGE_LOGGER = "statepipe"


def setup_file_logging(
    log_file: Path,
    level: str = "INFO",
) -> logging.Logger:
    """
    Attach a plain-text file handler to the package logger.

    Args:
        log_file: Log file path
        level: Logging level

    Returns:
        Configured logger

    """
    log_format = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

    log_file.parent.mkdir(parents=True, exist_ok=True)
    file_handler = logging.FileHandler(log_file, encoding="utf-8")
    file_handler.setFormatter(logging.Formatter(log_format))

    logger = logging.getLogger(PACKAGE_LOGGER)
    logger.setLevel(getattr(logging, level.upper()))
    logger.addHandler(file_handler)

    return logger
