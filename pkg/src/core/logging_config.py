"""Structured logging for experiment runs."""

import logging
import os
import sys
from enum import Enum
from typing import Optional


class LogLevel(Enum):
    QUIET = "QUIET"
    NORMAL = "NORMAL"
    VERBOSE = "VERBOSE"
    DEBUG = "DEBUG"


_LEVEL_MAP = {
    LogLevel.QUIET: logging.WARNING,
    LogLevel.NORMAL: logging.INFO,
    LogLevel.VERBOSE: logging.DEBUG,
    LogLevel.DEBUG: logging.DEBUG,
}


class ProductionLogger:
    """Singleton wrapper around the ``vdt`` logger with ``key=value`` context."""

    _instance: Optional["ProductionLogger"] = None
    _level: LogLevel = LogLevel.NORMAL

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __init__(self):
        if not hasattr(self, "_initialized"):
            self._initialized = True
            self._setup_logging()

    def _setup_logging(self):
        """Attach a stderr handler; stdout is reserved for JSON reports."""
        self.logger = logging.getLogger("vdt")
        self.logger.propagate = True

        if not any(getattr(h, "_vdt_handler", False) for h in self.logger.handlers):
            handler = logging.StreamHandler(sys.stderr)
            handler._vdt_handler = True
            handler.setFormatter(
                logging.Formatter(
                    "%(asctime)s.%(msecs)03d [%(levelname)s] %(name)s: %(message)s",
                    datefmt="%H:%M:%S",
                )
            )
            self.logger.addHandler(handler)

        env_level = os.getenv("VDT_LOG_LEVEL")
        if env_level and env_level.upper() in LogLevel.__members__:
            self._level = LogLevel[env_level.upper()]
        self._update_level()

    def set_level(self, level: LogLevel):
        """Set logging verbosity."""
        self._level = level
        self._update_level()

    @property
    def level(self) -> LogLevel:
        return self._level

    def _update_level(self):
        self.logger.setLevel(_LEVEL_MAP[self._level])

    def should_log_verbose(self) -> bool:
        """Check if verbose logging enabled."""
        return self._level in (LogLevel.VERBOSE, LogLevel.DEBUG)

    def should_log_debug(self) -> bool:
        return self._level == LogLevel.DEBUG

    def info(self, msg: str, **kwargs):
        if self._level == LogLevel.QUIET:
            return
        self.logger.info(self._compose(msg, kwargs))

    def debug(self, msg: str, **kwargs):
        if self.should_log_debug():
            self.logger.debug(self._compose(msg, kwargs))

    def warning(self, msg: str, **kwargs):
        self.logger.warning(self._compose(msg, kwargs))

    def error(self, msg: str, **kwargs):
        self.logger.error(self._compose(msg, kwargs))

    def verbose(self, msg: str, **kwargs):
        """Log at info severity, but only in verbose/debug mode."""
        if self.should_log_verbose():
            self.logger.info(self._compose(msg, kwargs))

    @classmethod
    def _compose(cls, msg: str, kwargs: dict) -> str:
        return f"{msg} | {cls._format_kwargs(kwargs)}" if kwargs else msg

    @staticmethod
    def _format_kwargs(kwargs: dict) -> str:
        """Format kwargs for logging, rounding floats."""
        parts = []
        for key, value in kwargs.items():
            if isinstance(value, float):
                value = f"{value:.6g}"
            parts.append(f"{key}={value}")
        return " ".join(parts)


def get_logger() -> ProductionLogger:
    """Get singleton logger instance."""
    return ProductionLogger()
