"""Cover-Pombra parametrization and its conversion to and from (A, C, G_T).

In the ISI view the channel input is u = B Z N + (I + B) r with r ~ N(0, K_r)
independent of the noise; in the colored-noise view u = B Z + v with
K_v = (I + B) K_r (I + B)'.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from ..channel.spec import ChannelSpec
from ..channel.toeplitz import toeplitz_bundle
from ..errors import DimensionMismatch, NotPSD
from ..utils.linalg import is_strictly_lower, logdet_pd, psd_sqrt, strictly_lower, symmetrize
from .encoder import EncoderSpec
from .generator import FeedbackGenerator, one_step_predictor

logger = logging.getLogger(__name__)

PD_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class CPParams:
    """Covariance K_r (ISI view) and strictly lower triangular B_T."""

    K_r: np.ndarray
    B_T: np.ndarray

    def __post_init__(self):
        if self.K_r.shape != self.B_T.shape:
            raise DimensionMismatch(
                f"K_r {self.K_r.shape} and B_T {self.B_T.shape} differ in shape")
        if not is_strictly_lower(self.B_T):
            raise ValueError("B_T must be strictly lower triangular")
        w = np.linalg.eigvalsh(symmetrize(self.K_r))
        if w.size and w[0] < -1e-9 * max(1.0, float(w[-1])):
            raise NotPSD(float(w[0]))

    @property
    def horizon(self) -> int:
        return self.K_r.shape[0] - 1

    @property
    def K_v(self) -> np.ndarray:
        """Innovation covariance of the colored-noise view, (I+B) K_r (I+B)'."""
        IB = np.eye(self.K_r.shape[0]) + self.B_T
        return IB @ self.K_r @ IB.T


def cp_from_structure(encoder: EncoderSpec, generator: FeedbackGenerator,
                      channel: ChannelSpec, T: int) -> CPParams:
    """B_T = G Zinv (I - G Zinv)^{-1}, K_r = Gamma_T Gamma_T'."""
    Zinv = toeplitz_bundle(channel, T).Zinv_T
    GZ = generator.G_T @ Zinv
    B = np.linalg.solve((np.eye(T + 1) - GZ).T, GZ.T).T
    return CPParams(K_r=encoder.K_r(T), B_T=strictly_lower(B))


def _upper_shift(size: int) -> np.ndarray:
    return np.eye(size, k=1)


def structure_from_cp(cp: CPParams, channel: ChannelSpec, T: int,
                      ridge_index: Optional[int] = None) -> Tuple[EncoderSpec, FeedbackGenerator]:
    """Encoder with n = T and generator reproducing the CP channel input.

    Gamma_a = K_r^{1/2}, A = Gamma_a^{-1} A_a Gamma_a with A_a the upper shift
    (free last row set to zero), C = Gamma_a e_1 and G_T = (I+B)^{-1} B Z_T.
    With ``ridge_index`` = i the covariance K_r + I/i is used instead.

    Raises:
        NotPSD: K_r is not positive definite and no ridge index was given.
    """
    size = T + 1
    if cp.K_r.shape != (size, size):
        raise DimensionMismatch(f"CP parameters cover {cp.K_r.shape[0]} steps, need {size}")
    K = symmetrize(cp.K_r)
    if ridge_index is not None:
        K = K + np.eye(size) / float(ridge_index)
    w = np.linalg.eigvalsh(K)
    if w[0] <= PD_RTOL * max(1.0, float(w[-1])):
        raise NotPSD(float(w[0]), "K_r is not positive definite; use the ridge sequence")
    gamma_a = psd_sqrt(K)
    A = np.linalg.solve(gamma_a, _upper_shift(size) @ gamma_a)
    C = gamma_a[:, 0].copy()
    encoder = EncoderSpec.from_matrices(A, C)

    Z = toeplitz_bundle(channel, T).Z_T
    IB = np.eye(size) + cp.B_T
    G = np.linalg.solve(IB, cp.B_T @ Z)
    return encoder, FeedbackGenerator.from_matrix(G)


def ridge_sequence(cp: CPParams, channel: ChannelSpec, T: int,
                   indices=(10, 100, 1000)) -> List[Tuple[int, EncoderSpec, FeedbackGenerator]]:
    """(i, A_i, G_i) for the ridge covariances K_r + I/i.

    Power and rate constraints are not carried through the limit.
    """
    return [(i, *structure_from_cp(cp, channel, T, ridge_index=i)) for i in indices]


def cp_optimal_form(encoder: EncoderSpec, channel: ChannelSpec, T: int) -> CPParams:
    """CP parameters of the optimal structure: B* = -Ghat Zinv.

    The colored-noise covariance is then K_v = (I - Ghat Zinv) K_r (I - Ghat Zinv)'.
    """
    Zinv = toeplitz_bundle(channel, T).Zinv_T
    K_r = encoder.K_r(T)
    Ghat, _ = one_step_predictor(K_r, Zinv)
    return CPParams(K_r=K_r, B_T=strictly_lower(-Ghat @ Zinv))


def cp_rate_isi(cp: CPParams, channel: ChannelSpec) -> float:
    """(1/2) log det(K_Z + K_r) in nats (det K_Z = 1)."""
    bundle = toeplitz_bundle(channel, cp.horizon)
    return 0.5 * logdet_pd(bundle.K_Z + cp.K_r)


def cp_rate_colored(cp: CPParams, channel: ChannelSpec) -> float:
    """(1/2) log det((I+B) K_Z (I+B)' + K_v) - (1/2) log det K_Z in nats."""
    bundle = toeplitz_bundle(channel, cp.horizon)
    IB = np.eye(bundle.size) + cp.B_T
    return 0.5 * (logdet_pd(IB @ bundle.K_Z @ IB.T + cp.K_v) - logdet_pd(bundle.K_Z))


def cp_power(cp: CPParams, channel: ChannelSpec) -> float:
    """(1/(T+1)) tr(B K_Z B' + (I+B) K_r (I+B)')."""
    bundle = toeplitz_bundle(channel, cp.horizon)
    return float(np.trace(cp.B_T @ bundle.K_Z @ cp.B_T.T + cp.K_v)) / bundle.size
