"""Configuration management for feedback lab experiments."""

from .settings import (
    ChannelConfig,
    EncoderConfig,
    ExperimentConfig,
    LogBase,
    MonteCarloConfig,
    OutputConfig,
    SearchConfig,
)

__all__ = [
    "ChannelConfig",
    "EncoderConfig",
    "ExperimentConfig",
    "LogBase",
    "MonteCarloConfig",
    "OutputConfig",
    "SearchConfig",
]
