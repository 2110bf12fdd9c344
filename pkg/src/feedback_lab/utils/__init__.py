"""Utility functions and helpers."""

from .logging import ContextualLogger, TimedOperation, get_logger, setup_logging

__all__ = ["setup_logging", "get_logger", "ContextualLogger", "TimedOperation"]
