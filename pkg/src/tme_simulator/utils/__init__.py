"""Utilities package for the simulator."""

from .logging import LoggerMixin, get_logger, setup_logging
from .random import RandomStream

__all__ = [
    "LoggerMixin",
    "get_logger",
    "setup_logging",
    "RandomStream",
]
