"""State-space realizations of the channel and their simulation."""

import logging
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from ..errors import DimensionMismatch, NotInvertible
from ..utils.linalg import as_vector, lower_toeplitz
from .spec import ChannelSpec

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class StateSpaceRealization:
    """Single-input single-output system (A, B, C', D).

    s_{t+1} = A s_t + B u_t,  y_t = C' s_t + D u_t.
    """

    A_mat: np.ndarray
    B_vec: np.ndarray
    C_vec: np.ndarray
    D: float

    def __post_init__(self):
        n = self.A_mat.shape[0]
        if self.A_mat.shape != (n, n) or self.B_vec.shape != (n,) or self.C_vec.shape != (n,):
            raise DimensionMismatch(
                f"inconsistent realization shapes A{self.A_mat.shape} "
                f"B{self.B_vec.shape} C{self.C_vec.shape}")

    @classmethod
    def build(cls, A, B, C, D: float) -> "StateSpaceRealization":
        B = as_vector(B)
        A = np.asarray(A, dtype=float).reshape(B.size, B.size)
        return cls(A_mat=A, B_vec=B, C_vec=as_vector(C), D=float(D))

    @property
    def dim(self) -> int:
        return int(self.A_mat.shape[0])

    def transfer(self, z) -> np.ndarray:
        """Evaluate D + C'(zI - A)^{-1} B at the given points."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        out = np.full(z.shape, self.D, dtype=complex)
        if self.dim == 0:
            return out
        eye = np.eye(self.dim)
        for k, zk in enumerate(z):
            out[k] += self.C_vec @ np.linalg.solve(zk * eye - self.A_mat, self.B_vec)
        return out

    def frequency_response(self, theta) -> np.ndarray:
        return frequency_response(self, theta)

    def impulse_response(self, T: int) -> np.ndarray:
        """h_0 = D, h_k = C' A^{k-1} B for k = 1..T."""
        h = np.zeros(T + 1)
        h[0] = self.D
        if self.dim == 0:
            return h
        v = self.B_vec.copy()
        for k in range(1, T + 1):
            h[k] = self.C_vec @ v
            v = self.A_mat @ v
        return h

    def simulate(self, u: np.ndarray, noise: Optional[np.ndarray] = None) -> np.ndarray:
        return simulate_channel(self, u, np.zeros_like(u) if noise is None else noise)


def channel_state_space(spec: ChannelSpec) -> StateSpaceRealization:
    """Observable canonical realization (F, G, H', 1) of Z(z)^{-1}.

    F has -f_{m-1}..-f_0 in its first column and ones on the superdiagonal,
    G = (g_{m-1}..g_0) and H = e_1.
    """
    m = spec.m
    F = np.zeros((m, m))
    if m:
        F[:, 0] = -spec.f
        F[:-1, 1:] = np.eye(m - 1)
    H = np.zeros(m)
    if m:
        H[0] = 1.0
    return StateSpaceRealization(A_mat=F, B_vec=spec.g.astype(float).copy(), C_vec=H, D=1.0)


def invert_realization(ss: StateSpaceRealization) -> StateSpaceRealization:
    """Inverse system (A - BC'/D, -B/D, C'/D, 1/D); (A - BC', -B, C', 1) when D = 1."""
    if ss.D == 0.0:
        raise NotInvertible("system has zero feedthrough and cannot be inverted")
    A = ss.A_mat - np.outer(ss.B_vec, ss.C_vec) / ss.D
    return StateSpaceRealization(A_mat=A, B_vec=-ss.B_vec / ss.D,
                                 C_vec=ss.C_vec / ss.D, D=1.0 / ss.D)


def factor_realizations(spec: ChannelSpec) -> Dict[str, StateSpaceRealization]:
    """Realizations of Z, Z^{-1} and the FIR factors Z_z, Z_p."""
    canonical = channel_state_space(spec)
    m = spec.m
    shift = canonical.A_mat.copy()
    if m:
        shift[:, 0] = 0.0
    H = canonical.C_vec
    return {
        "Z": invert_realization(canonical),
        "Zinv": canonical,
        "Zz": StateSpaceRealization(A_mat=shift, B_vec=spec.f.astype(float).copy(), C_vec=H, D=1.0),
        "Zp": StateSpaceRealization(A_mat=shift.copy(), B_vec=(spec.f + spec.g).astype(float),
                                    C_vec=H.copy(), D=1.0),
    }


def simulate_channel(ss: StateSpaceRealization, u_sequence, noise_sequence) -> np.ndarray:
    """y_t = C's_t + D u_t + N_t with s_{t+1} = A s_t + B u_t from rest."""
    u = as_vector(u_sequence, "u")
    noise = as_vector(noise_sequence, "noise")
    if u.size != noise.size:
        raise DimensionMismatch(
            f"input and noise lengths differ ({u.size} vs {noise.size})")
    y = np.empty(u.size)
    s = np.zeros(ss.dim)
    for t in range(u.size):
        y[t] = ss.C_vec @ s + ss.D * u[t] + noise[t]
        s = ss.A_mat @ s + ss.B_vec * u[t]
    return y


def frequency_response(ss: StateSpaceRealization, theta) -> np.ndarray:
    """Transfer function evaluated on the unit circle at angles ``theta``."""
    return ss.transfer(np.exp(1j * np.asarray(theta, dtype=float)))


def unit_circle_grid(points: int) -> np.ndarray:
    """Equispaced angles 2*pi*k/points, k = 0..points-1."""
    return 2.0 * np.pi * np.arange(points) / points


def cascade(first: StateSpaceRealization, second: StateSpaceRealization) -> StateSpaceRealization:
    """Series connection: ``first`` feeds ``second``."""
    n1, n2 = first.dim, second.dim
    A = np.zeros((n1 + n2, n1 + n2))
    A[:n1, :n1] = first.A_mat
    A[n1:, :n1] = np.outer(second.B_vec, first.C_vec)
    A[n1:, n1:] = second.A_mat
    B = np.concatenate((first.B_vec, second.B_vec * first.D))
    C = np.concatenate((second.D * first.C_vec, second.C_vec))
    return StateSpaceRealization(A_mat=A, B_vec=B, C_vec=C, D=first.D * second.D)


def io_map(ss: StateSpaceRealization, T: int) -> np.ndarray:
    """Lower-triangular Toeplitz matrix of the system over horizon T."""
    return lower_toeplitz(ss.impulse_response(T), T + 1)


def colored_noise(spec: ChannelSpec, noise) -> np.ndarray:
    """Colored noise Z = Z_T N generated by the filter from white noise."""
    realizations = factor_realizations(spec)
    return simulate_channel(realizations["Z"], noise, np.zeros_like(as_vector(noise)))


def simulate_colored(spec: ChannelSpec, u_sequence,
                     noise_sequence) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Colored-noise view of the same channel.

    Returns (Z, y_tilde, y) with Z = Z_T N, y_tilde = u + Z and the ISI output
    y = Z_T^{-1} y_tilde, which equals Z_T^{-1} u + N.
    """
    u = as_vector(u_sequence, "u")
    noise = as_vector(noise_sequence, "noise")
    if u.size != noise.size:
        raise DimensionMismatch(
            f"input and noise lengths differ ({u.size} vs {noise.size})")
    z = colored_noise(spec, noise)
    y_tilde = u + z
    y = simulate_channel(channel_state_space(spec), y_tilde, np.zeros_like(u))
    return z, y_tilde, y
