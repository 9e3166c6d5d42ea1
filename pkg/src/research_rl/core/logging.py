"""
Logging Setup Module - Centralized logging configuration (Anti-Duplication).
"""
from __future__ import annotations

import logging
import logging.config
from datetime import datetime
from pathlib import Path


def setup_logger(
    name: str | None = None,
    verbose: bool = False,
    log_dir: str | Path | None = "logs",
    level: str = "DEBUG",
) -> logging.Logger:
    """
    Configure logging globally on the root logger and return the requested logger.

    Anti-duplication strategy:
    1. Clear every handler already installed on the root logger.
    2. Install the console handler (and a file handler when ``log_dir`` is set) ONLY on root.
    3. Named loggers carry no handlers of their own and rely on propagation.
    """
    root_logger = logging.getLogger()
    if root_logger.hasHandlers():
        root_logger.handlers.clear()

    console_level = "INFO" if verbose else "WARNING"

    handlers: dict[str, dict[str, object]] = {
        "console_handler": {
            "class": "logging.StreamHandler",
            "level": console_level,
            "formatter": "console_fmt",
            "stream": "ext://sys.stderr",
        },
    }

    if log_dir is not None:
        Path(log_dir).mkdir(parents=True, exist_ok=True)
        timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
        file_prefix = name if name else "system"
        handlers["file_handler"] = {
            "class": "logging.FileHandler",
            "level": level,
            "formatter": "file_fmt",
            "filename": str(Path(log_dir) / f"{file_prefix}_{timestamp}.log"),
            "encoding": "utf-8",
        }

    config = {
        "version": 1,
        "disable_existing_loggers": False,
        "formatters": {
            "file_fmt": {
                "format": "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
            },
            "console_fmt": {
                "format": "%(message)s",
            },
        },
        "handlers": handlers,
        "root": {
            "level": level,
            "handlers": list(handlers),
        },
    }

    logging.config.dictConfig(config)

    if name:
        specific_logger = logging.getLogger(name)
        specific_logger.setLevel(level)
        return specific_logger

    return logging.getLogger()
