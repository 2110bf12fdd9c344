"""MMSE precoding of linear feedback policies."""

import logging
from dataclasses import dataclass

import numpy as np

from ..channel.spec import ChannelSpec
from ..channel.toeplitz import toeplitz_bundle
from ..errors import DimensionMismatch
from ..utils.linalg import is_strictly_lower
from .encoder import EncoderSpec
from .generator import generator_from_predictor, one_step_predictor

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class LinearPolicy:
    """u = Gamma W + G_T y with W ~ N(0, I) and G_T strictly lower triangular.

    ``Gamma`` is (T+1) x k; an encoder (A, C) gives Gamma = Gamma_T.
    """

    Gamma: np.ndarray
    G_T: np.ndarray

    def __post_init__(self):
        size = self.G_T.shape[0]
        if self.G_T.shape != (size, size) or self.Gamma.shape[0] != size:
            raise DimensionMismatch(
                f"Gamma {self.Gamma.shape} and G_T {self.G_T.shape} do not match")
        if not is_strictly_lower(self.G_T):
            raise ValueError("G_T must be strictly lower triangular")

    @classmethod
    def from_encoder(cls, encoder: EncoderSpec, G_T: np.ndarray) -> "LinearPolicy":
        T = np.asarray(G_T).shape[0] - 1
        return cls(Gamma=encoder.gamma(T), G_T=np.asarray(G_T, dtype=float))

    @property
    def horizon(self) -> int:
        return self.G_T.shape[0] - 1

    @property
    def K_r(self) -> np.ndarray:
        return self.Gamma @ self.Gamma.T


def mmse_precode(policy: LinearPolicy, channel: ChannelSpec, T: int) -> LinearPolicy:
    """Policy emitting u~_t = u_t - E(u_t | y^{t-1}).

    Because y^{t-1} and the open-loop output ybar^{t-1} = (Zinv r + N)^{t-1}
    determine each other, u~_t = r_t - E(r_t | ybar^{t-1}); the result keeps
    Gamma and replaces the generator by the one built from the LMMSE predictor.
    """
    if policy.horizon != T:
        raise DimensionMismatch(f"policy covers horizon {policy.horizon}, need {T}")
    Zinv = toeplitz_bundle(channel, T).Zinv_T
    Ghat, _ = one_step_predictor(policy.K_r, Zinv)
    G_new = generator_from_predictor(Ghat, Zinv)
    logger.debug(f"Precoded policy T={T}: generator change "
                 f"{float(np.max(np.abs(G_new - policy.G_T))):.3e}")
    return LinearPolicy(Gamma=policy.Gamma.copy(), G_T=G_new)
