"""ARMA(m) Gaussian channel description and validation."""

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import DimensionMismatch, NotMinimumPhase, NotStable

logger = logging.getLogger(__name__)

ROOT_MARGIN = 1.0 - 1e-9


@dataclass(frozen=True, eq=False)
class ChannelSpec:
    """Noise filter Z(z) = (z^m + f_{m-1} z^{m-1} + ... + f_0) / (z^m + (f+g)_{m-1} ... ).

    ``f`` and ``g`` are stored highest power first (f_{m-1} .. f_0). The
    additive white noise driving the filter has unit variance.
    """

    f: np.ndarray
    g: np.ndarray
    zeros: np.ndarray = field(repr=False)
    poles: np.ndarray = field(repr=False)
    noise_variance: float = 1.0

    @property
    def m(self) -> int:
        return int(self.f.size)

    @property
    def numerator(self) -> np.ndarray:
        """Monic coefficients of Z_z, highest power first."""
        return np.concatenate(([1.0], self.f))

    @property
    def denominator(self) -> np.ndarray:
        """Monic coefficients of Z_p, highest power first."""
        return np.concatenate(([1.0], self.f + self.g))

    @property
    def is_awgn(self) -> bool:
        return self.m == 0

    def transfer(self, z) -> np.ndarray:
        """Evaluate Z(z)."""
        z = np.asarray(z, dtype=complex)
        return np.polyval(self.numerator, z) / np.polyval(self.denominator, z)

    def inverse_transfer(self, z) -> np.ndarray:
        """Evaluate Z(z)^{-1}, the ISI filter seen by the channel input."""
        z = np.asarray(z, dtype=complex)
        return np.polyval(self.denominator, z) / np.polyval(self.numerator, z)

    def as_dict(self) -> dict:
        return {
            "m": self.m,
            "f": self.f.tolist(),
            "g": self.g.tolist(),
            "numerator_root_moduli": np.abs(self.zeros).tolist(),
            "denominator_root_moduli": np.abs(self.poles).tolist(),
        }


def polynomial_roots(monic: np.ndarray) -> np.ndarray:
    """Roots of a monic polynomial as eigenvalues of its companion matrix."""
    if monic.size <= 1:
        return np.zeros(0, dtype=complex)
    return np.roots(monic).astype(complex)


def _worst_root(roots: np.ndarray):
    idx = int(np.argmax(np.abs(roots)))
    return roots[idx], float(np.abs(roots[idx]))


def validate_channel(f: Sequence[float], g: Sequence[float]) -> ChannelSpec:
    """Build a ChannelSpec, checking minimum phase and stability.

    Raises:
        DimensionMismatch: ``f`` and ``g`` differ in length.
        NotMinimumPhase: a root of z^m + f(z) has modulus above 1 - 1e-9.
        NotStable: a root of z^m + (f+g)(z) has modulus above 1 - 1e-9.
    """
    f_arr = np.asarray(list(f), dtype=float).reshape(-1)
    g_arr = np.asarray(list(g), dtype=float).reshape(-1)
    if f_arr.size != g_arr.size:
        raise DimensionMismatch(
            f"f and g must have equal length, got {f_arr.size} and {g_arr.size}")
    if not (np.all(np.isfinite(f_arr)) and np.all(np.isfinite(g_arr))):
        raise DimensionMismatch("channel coefficients must be finite")

    zeros = polynomial_roots(np.concatenate(([1.0], f_arr)))
    poles = polynomial_roots(np.concatenate(([1.0], f_arr + g_arr)))

    if zeros.size:
        root, modulus = _worst_root(zeros)
        if modulus > ROOT_MARGIN:
            raise NotMinimumPhase(root, modulus)
    if poles.size:
        root, modulus = _worst_root(poles)
        if modulus > ROOT_MARGIN:
            raise NotStable(root, modulus)

    f_arr.setflags(write=False)
    g_arr.setflags(write=False)
    spec = ChannelSpec(f=f_arr, g=g_arr, zeros=zeros, poles=poles)
    logger.debug(f"Validated channel m={spec.m} f={f_arr.tolist()} g={g_arr.tolist()}")
    return spec


def awgn() -> ChannelSpec:
    return validate_channel([], [])
