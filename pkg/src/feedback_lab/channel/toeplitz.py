"""Finite-horizon Toeplitz operators of the channel."""

from dataclasses import dataclass

import numpy as np

from ..utils.linalg import lower_toeplitz
from .realization import channel_state_space, factor_realizations, invert_realization
from .spec import ChannelSpec


@dataclass(frozen=True, eq=False)
class ToeplitzBundle:
    """Z_T, Z_T^{-1}, Z_{z,T} and Z_{p,T} over horizon T, each (T+1)x(T+1)."""

    Z_T: np.ndarray
    Zinv_T: np.ndarray
    Zz_T: np.ndarray
    Zp_T: np.ndarray
    horizon: int

    @property
    def size(self) -> int:
        return self.horizon + 1

    @property
    def K_Z(self) -> np.ndarray:
        """Covariance of the colored noise, Z_T Z_T'."""
        return self.Z_T @ self.Z_T.T

    def factorization_residuals(self) -> dict:
        eye = np.eye(self.size)
        return {
            "Z_Zinv": float(np.max(np.abs(self.Z_T @ self.Zinv_T - eye))),
            "Zp_Z_minus_Zz": float(np.max(np.abs(self.Zp_T @ self.Z_T - self.Zz_T))),
        }


def toeplitz_bundle(spec: ChannelSpec, T: int) -> ToeplitzBundle:
    """Build all four operators from impulse responses."""
    if T < 0:
        raise ValueError(f"horizon must be non-negative, got {T}")
    size = T + 1
    canonical = channel_state_space(spec)
    factors = factor_realizations(spec)
    return ToeplitzBundle(
        Z_T=lower_toeplitz(invert_realization(canonical).impulse_response(T), size),
        Zinv_T=lower_toeplitz(canonical.impulse_response(T), size),
        Zz_T=lower_toeplitz(factors["Zz"].impulse_response(T), size),
        Zp_T=lower_toeplitz(factors["Zp"].impulse_response(T), size),
        horizon=T,
    )
