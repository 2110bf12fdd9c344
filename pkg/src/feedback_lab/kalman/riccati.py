"""Finite-horizon Riccati recursion on the augmented encoder/channel state.

The augmented state stacks the encoder state and the channel state,
X_t = (x_t; s_t), with

    A_bb = [[A, 0], [G C', F]],  C_bb = [C; H],  D_bb = [C; 0].

The recursion is the one-step prediction Kalman filter with unit measurement
noise and no process noise, started from Sigma_0 = diag(I_{n+1}, 0).
"""

import logging
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, Optional, Tuple

import numpy as np

from ..channel.realization import channel_state_space
from ..channel.spec import ChannelSpec
from ..utils.linalg import as_matrix, as_vector, symmetrize

if TYPE_CHECKING:
    from ..coding.encoder import EncoderSpec
    from .steady import SteadyState

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class AugmentedSystem:
    Abb: np.ndarray
    Cbb: np.ndarray
    Dbb: np.ndarray
    n_enc: int
    m_ch: int
    Gch: np.ndarray

    @classmethod
    def build(cls, A, C, channel: ChannelSpec) -> "AugmentedSystem":
        A = as_matrix(A, "A")
        C = as_vector(C, "C")
        ch = channel_state_space(channel)
        k, m = A.shape[0], ch.dim
        Abb = np.zeros((k + m, k + m))
        Abb[:k, :k] = A
        Abb[k:, :k] = np.outer(ch.B_vec, C)
        Abb[k:, k:] = ch.A_mat
        Cbb = np.concatenate((C, ch.C_vec))
        Dbb = np.concatenate((C, np.zeros(m)))
        return cls(Abb=Abb, Cbb=Cbb, Dbb=Dbb, n_enc=k, m_ch=m, Gch=ch.B_vec.copy())

    @classmethod
    def from_encoder(cls, encoder: "EncoderSpec", channel: ChannelSpec) -> "AugmentedSystem":
        return cls.build(encoder.A, encoder.C, channel)

    @property
    def dim(self) -> int:
        return self.n_enc + self.m_ch

    @property
    def A(self) -> np.ndarray:
        return self.Abb[:self.n_enc, :self.n_enc]

    @property
    def C(self) -> np.ndarray:
        return self.Cbb[:self.n_enc]

    @property
    def F(self) -> np.ndarray:
        return self.Abb[self.n_enc:, self.n_enc:]

    @property
    def H(self) -> np.ndarray:
        return self.Cbb[self.n_enc:]

    def initial_covariance(self) -> np.ndarray:
        sigma0 = np.zeros((self.dim, self.dim))
        sigma0[:self.n_enc, :self.n_enc] = np.eye(self.n_enc)
        return sigma0

    def closed_loop(self, L: np.ndarray) -> np.ndarray:
        return self.Abb - np.outer(L, self.Cbb)


def riccati_step(Sigma: np.ndarray, aug: AugmentedSystem) -> Tuple[np.ndarray, np.ndarray, float]:
    """One step of Sigma' = A S A' - A S C C' S A' / (C' S C + 1).

    Returns (Sigma_next, L_t, K_e,t) with L_t = A S C / K_e.
    """
    ASC = aug.Abb @ Sigma @ aug.Cbb
    Ke = float(aug.Cbb @ Sigma @ aug.Cbb) + 1.0
    L = ASC / Ke
    Sigma_next = aug.Abb @ Sigma @ aug.Abb.T - np.outer(ASC, ASC) / Ke
    return symmetrize(Sigma_next), L, Ke


@dataclass(frozen=True, eq=False)
class RiccatiTrajectory:
    """Sigma_0..Sigma_{T+1}, gains L_0..L_T, innovation variances K_e,0..K_e,T.

    ``Phi[t]`` is the product A_cl(t-1)...A_cl(0) of augmented closed-loop
    matrices A_bb - L_k C_bb' (identity at t = 0); ``phi[t]`` is the same
    product of the encoder blocks A - L_{1,k} C'.
    """

    aug: AugmentedSystem
    Sigma: np.ndarray
    L: np.ndarray
    Ke: np.ndarray
    Phi: np.ndarray
    phi: np.ndarray
    steady: Optional["SteadyState"] = None

    @property
    def horizon(self) -> int:
        return int(self.Ke.size - 1)

    def L1(self, t: int) -> np.ndarray:
        return self.L[t, :self.aug.n_enc]

    def L2(self, t: int) -> np.ndarray:
        return self.L[t, self.aug.n_enc:]

    def Sigma_x(self, t: int) -> np.ndarray:
        k = self.aug.n_enc
        return self.Sigma[t, :k, :k]

    def A_cl(self, t: int) -> np.ndarray:
        return self.aug.closed_loop(self.L[t])

    def input_variances(self) -> np.ndarray:
        """D_bb' Sigma_t D_bb for t = 0..T (per-step channel-input power)."""
        D = self.aug.Dbb
        return np.einsum("i,tij,j->t", D, self.Sigma[:-1], D)


def riccati_recursion(aug: AugmentedSystem, T: int) -> RiccatiTrajectory:
    d, k = aug.dim, aug.n_enc
    Sigma = np.empty((T + 2, d, d))
    L = np.empty((T + 1, d))
    Ke = np.empty(T + 1)
    Phi = np.empty((T + 1, d, d))
    phi = np.empty((T + 1, k, k))

    Sigma[0] = aug.initial_covariance()
    Phi[0] = np.eye(d)
    phi[0] = np.eye(k)
    for t in range(T + 1):
        Sigma[t + 1], L[t], Ke[t] = riccati_step(Sigma[t], aug)
        if t < T:
            Phi[t + 1] = aug.closed_loop(L[t]) @ Phi[t]
            phi[t + 1] = (aug.A - np.outer(L[t, :k], aug.C)) @ phi[t]
    return RiccatiTrajectory(aug=aug, Sigma=Sigma, L=L, Ke=Ke, Phi=Phi, phi=phi)


def riccati_run(encoder: "EncoderSpec", channel: ChannelSpec, T: int,
                include_steady: bool = False) -> RiccatiTrajectory:
    """Run the recursion from Sigma_0 = diag(I, 0) over t = 0..T.

    With ``include_steady`` the steady-state limit is attached as well
    (requires assumption A2).
    """
    if T < 0:
        raise ValueError(f"horizon must be non-negative, got {T}")
    aug = AugmentedSystem.from_encoder(encoder, channel)
    traj = riccati_recursion(aug, T)
    logger.debug(f"Riccati run n={encoder.n} m={channel.m} T={T} "
                 f"K_e,T={traj.Ke[-1]:.6g}")
    if include_steady:
        from .steady import riccati_steady_iterate
        traj = replace(traj, steady=riccati_steady_iterate(encoder, channel))
    return traj
