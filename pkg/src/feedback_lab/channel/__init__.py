"""Gaussian channels with memory: filter, state-space and Toeplitz views."""

from .realization import (
    StateSpaceRealization,
    channel_state_space,
    factor_realizations,
    frequency_response,
    invert_realization,
    simulate_channel,
    simulate_colored,
)
from .spec import ChannelSpec, awgn, validate_channel
from .toeplitz import ToeplitzBundle, toeplitz_bundle

__all__ = [
    "ChannelSpec",
    "StateSpaceRealization",
    "ToeplitzBundle",
    "awgn",
    "channel_state_space",
    "factor_realizations",
    "frequency_response",
    "invert_realization",
    "simulate_channel",
    "simulate_colored",
    "toeplitz_bundle",
    "validate_channel",
]
