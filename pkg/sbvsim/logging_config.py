#!/usr/bin/env python3
"""
Centralized Logging Configuration for the SBV simulator
Console diagnostics go to stderr; a rotating log file is written only on request
"""

import logging
import logging.handlers
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

DEFAULT_LOGGING: Dict[str, Any] = {
    "level": "INFO",
    "console_output": True,
    "file_output": False,
    "log_file": "logs/sbvsim.log",
    "file_rotation": True,
    "max_file_size": "10MB",
    "backup_count": 5,
    "log_format": "%(asctime)s - %(levelname)s - %(name)s - %(message)s",
    "date_format": "%Y-%m-%d %H:%M:%S",
}

SIZE_UNITS = {"KB": 1024, "MB": 1024 ** 2, "GB": 1024 ** 3}

# Marks handlers installed by SimLogger so reconfiguration only replaces those
HANDLER_TAG = "_sbvsim"


class SimLogger:
    """Centralized logging configuration for sbvsim"""

    _configured = False

    @classmethod
    def configure(cls, config: Optional[Dict[str, Any]] = None, force: bool = False):
        """Install console/file handlers on the root logger; a second call is a no-op unless forced"""
        if cls._configured and not force:
            return

        settings = {**DEFAULT_LOGGING, **(config or {})}
        level = logging.getLevelName(str(settings["level"]).upper())
        if not isinstance(level, int):
            raise ValueError(f"unknown log level {settings['level']!r}")

        root = logging.getLogger()
        root.setLevel(level)
        cls._release_handlers(root)

        formatter = logging.Formatter(settings["log_format"], datefmt=settings["date_format"])
        for handler in cls._build_handlers(settings):
            handler.setFormatter(formatter)
            handler.setLevel(level)
            setattr(handler, HANDLER_TAG, True)
            root.addHandler(handler)

        cls._configure_module_loggers(settings["level"])
        cls._configured = True

        logger = logging.getLogger(__name__)
        logger.debug(f"Log level: {settings['level']}")
        if settings["file_output"]:
            logger.debug(f"Log file: {settings['log_file']}")

    @classmethod
    def _build_handlers(cls, settings: Dict[str, Any]) -> List[logging.Handler]:
        handlers: List[logging.Handler] = []
        if settings["console_output"]:
            handlers.append(logging.StreamHandler(sys.stderr))
        if settings["file_output"]:
            log_file = Path(settings["log_file"])
            log_file.parent.mkdir(parents=True, exist_ok=True)
            if settings["file_rotation"]:
                handlers.append(logging.handlers.RotatingFileHandler(
                    log_file,
                    maxBytes=cls._parse_size(settings["max_file_size"]),
                    backupCount=settings["backup_count"],
                    encoding="utf-8",
                ))
            else:
                handlers.append(logging.FileHandler(log_file, encoding="utf-8"))
        return handlers

    @staticmethod
    def _release_handlers(root: logging.Logger):
        # pytest's capture handlers and anything else foreign stay attached
        for handler in list(root.handlers):
            if getattr(handler, HANDLER_TAG, False):
                root.removeHandler(handler)
                handler.close()

    @classmethod
    def _configure_module_loggers(cls, level: str):
        """Simulator loggers follow the configured level"""
        for name in ("sbvsim", "__main__"):
            logging.getLogger(name).setLevel(str(level).upper())

    @classmethod
    def _parse_size(cls, size_str: str) -> int:
        """Parse size string like '10MB' to bytes"""
        text = size_str.strip().upper()
        for suffix, factor in SIZE_UNITS.items():
            if text.endswith(suffix):
                return int(text[:-len(suffix)]) * factor
        return int(text)

    @classmethod
    def get_logger(cls, name: str) -> logging.Logger:
        return logging.getLogger(name)


def get_logger(name: str) -> logging.Logger:
    """Convenience function to get a logger"""
    return SimLogger.get_logger(name)


def configure_logging(config: Optional[Dict[str, Any]] = None, force: bool = False):
    """Convenience function to configure logging"""
    SimLogger.configure(config, force=force)
