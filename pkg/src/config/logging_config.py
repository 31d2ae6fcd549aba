"""
Logging setup driven by LOGGING_CONFIG
"""

import logging
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Optional

from src.config.settings import LOGGING_CONFIG


def configure_logging(level: Optional[str] = None, log_file: Optional[str] = None) -> logging.Logger:
    """
    Install console (and optional rotating file) handlers on the package logger

    Args:
        level: Log level name, defaults to LOGGING_CONFIG["level"]
        log_file: Path of a rotating log file, defaults to LOGGING_CONFIG["file"]

    Returns:
        The configured ``src`` logger
    """
    root = logging.getLogger("src")
    root.setLevel((level or LOGGING_CONFIG["level"]).upper())

    for handler in list(root.handlers):
        root.removeHandler(handler)
        handler.close()

    formatter = logging.Formatter(LOGGING_CONFIG["format"])

    console = logging.StreamHandler()
    console.setFormatter(formatter)
    root.addHandler(console)

    log_file = log_file or LOGGING_CONFIG["file"]
    if log_file:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        file_handler = RotatingFileHandler(
            log_file,
            maxBytes=LOGGING_CONFIG["max_bytes"],
            backupCount=LOGGING_CONFIG["backup_count"],
        )
        file_handler.setFormatter(formatter)
        root.addHandler(file_handler)

    root.propagate = False
    return root
