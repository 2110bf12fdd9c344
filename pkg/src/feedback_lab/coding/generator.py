"""Feedback generators: the Kalman-filter optimal one and generic matrices.

Channel input u = r + G_T y with G_T strictly lower triangular. The optimal
generator feeds back u_t = r_t - rhat_t with rhat_t the one-step MMSE
prediction of r_t, i.e. G_T* = -Ghat (I - Zinv Ghat)^{-1} where Ghat maps the
open-loop output ybar = Zinv r + N to rhat.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import scipy.linalg as la

from ..channel.realization import StateSpaceRealization
from ..channel.spec import ChannelSpec
from ..channel.toeplitz import toeplitz_bundle
from ..errors import DimensionMismatch, NotPSD
from ..kalman.riccati import AugmentedSystem, RiccatiTrajectory, riccati_run
from ..utils.linalg import is_strictly_lower, strictly_lower
from .encoder import EncoderSpec

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class FeedbackGenerator:
    """Strictly lower triangular G_T, optionally with its Kalman state-space form."""

    G_T: np.ndarray
    kf_form: Optional[RiccatiTrajectory] = None

    def __post_init__(self):
        if self.G_T.ndim != 2 or self.G_T.shape[0] != self.G_T.shape[1]:
            raise DimensionMismatch(f"generator must be square, got {self.G_T.shape}")
        if not is_strictly_lower(self.G_T):
            raise ValueError("feedback generator must be strictly lower triangular")

    @classmethod
    def from_matrix(cls, G) -> "FeedbackGenerator":
        """Wrap a matrix, zeroing the diagonal and upper triangle."""
        return cls(G_T=strictly_lower(np.asarray(G, dtype=float)))

    @classmethod
    def zero(cls, T: int) -> "FeedbackGenerator":
        return cls(G_T=np.zeros((T + 1, T + 1)))

    @property
    def horizon(self) -> int:
        return self.G_T.shape[0] - 1

    @property
    def is_optimal(self) -> bool:
        return self.kf_form is not None

    def apply(self, y: np.ndarray) -> np.ndarray:
        return self.G_T @ y

    def apply_state_space(self, y: np.ndarray) -> np.ndarray:
        """Feedback -rhat computed by the Kalman recursion (optimal generators only)."""
        if self.kf_form is None:
            raise ValueError("generator has no state-space form")
        return kalman_feedback(self.kf_form, y)


def kalman_feedback(traj: RiccatiTrajectory, y: np.ndarray) -> np.ndarray:
    """-rhat_t driven by channel outputs y (columns are independent runs).

    xhat_{t+1} = A xhat_t + L1 e_t, shat_{t+1} = F shat_t + L2 e_t,
    e_t = y_t - H' shat_t, output -C' xhat_t.
    """
    aug = traj.aug
    y = np.asarray(y, dtype=float)
    batch = y.reshape(y.shape[0], -1)
    T1 = batch.shape[0]
    if T1 > traj.horizon + 1:
        raise DimensionMismatch(f"trajectory covers {traj.horizon + 1} steps, got {T1}")
    k = aug.n_enc
    xhat = np.zeros((k, batch.shape[1]))
    shat = np.zeros((aug.m_ch, batch.shape[1]))
    out = np.empty_like(batch)
    for t in range(T1):
        out[t] = -aug.C @ xhat
        e = batch[t] - aug.H @ shat
        xhat = aug.A @ xhat + np.outer(traj.L1(t), e)
        shat = aug.F @ shat + np.outer(traj.L2(t), e)
    return out.reshape(y.shape)


def kalman_predictor_matrix(traj: RiccatiTrajectory) -> np.ndarray:
    """Ghat*: map from open-loop output ybar = Zinv r + N to rhat.

    Estimation form: e = ybar - H' sbar_hat - rhat, xhat_{t+1} = A xhat + L1 e,
    sbar_hat_{t+1} = F sbar_hat + G rhat + L2 e, rhat = C' xhat.
    """
    aug = traj.aug
    size = traj.horizon + 1
    basis = np.eye(size)
    xhat = np.zeros((aug.n_enc, size))
    sbar = np.zeros((aug.m_ch, size))
    out = np.empty((size, size))
    for t in range(size):
        rhat = aug.C @ xhat
        out[t] = rhat
        e = basis[t] - aug.H @ sbar - rhat
        xhat = aug.A @ xhat + np.outer(traj.L1(t), e)
        sbar = aug.F @ sbar + np.outer(aug.Gch, rhat) + np.outer(traj.L2(t), e)
    return strictly_lower(out)


def generator_from_predictor(Ghat: np.ndarray, Zinv: np.ndarray) -> np.ndarray:
    """G = -Ghat (I - Zinv Ghat)^{-1}."""
    size = Ghat.shape[0]
    M = np.eye(size) - Zinv @ Ghat
    # G M = -Ghat, solved through the transpose
    G = -la.solve_triangular(M.T, Ghat.T, lower=False, unit_diagonal=True).T
    return strictly_lower(G)


def one_step_predictor(K_r: np.ndarray, Zinv: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """LMMSE one-step predictor of r from ybar = Zinv r + N, from covariances.

    Row t of the predictor is K_{r ybar}[t, :t] K_{ybar}[:t, :t]^{-1}. Computed
    through the Cholesky factor K_ybar = R R' (whitened innovations R^{-1} ybar).

    Returns:
        (Ghat, v) with v_t = var(r_t | ybar^{t-1}).
    """
    size = K_r.shape[0]
    K_ybar = Zinv @ K_r @ Zinv.T + np.eye(size)
    K_rybar = K_r @ Zinv.T
    try:
        R = la.cholesky(0.5 * (K_ybar + K_ybar.T), lower=True)
    except la.LinAlgError as exc:
        raise NotPSD(float(np.min(np.linalg.eigvalsh(K_ybar))),
                     f"output covariance is not positive definite: {exc}") from exc
    Q = la.solve_triangular(R, K_rybar.T, lower=True).T  # Q = K_rybar R^{-T}
    Q_strict = strictly_lower(Q)
    Ghat = la.solve_triangular(R.T, Q_strict.T, lower=False).T  # Q_strict R^{-1}
    v = np.diag(K_r) - np.sum(Q_strict ** 2, axis=1)
    return strictly_lower(Ghat), v


def optimal_feedback_generator(encoder: EncoderSpec, channel: ChannelSpec,
                               T: int) -> FeedbackGenerator:
    """Kalman-filter feedback generator G_T* in matrix and state-space forms."""
    if T < 0:
        raise ValueError(f"horizon must be non-negative, got {T}")
    traj = riccati_run(encoder, channel, T)
    Zinv = toeplitz_bundle(channel, T).Zinv_T
    G = generator_from_predictor(kalman_predictor_matrix(traj), Zinv)
    logger.debug(f"Built optimal generator n={encoder.n} m={channel.m} T={T}")
    return FeedbackGenerator(G_T=G, kf_form=traj)


def steady_feedback_realization(aug: AugmentedSystem, L: np.ndarray) -> StateSpaceRealization:
    """LTI map y -> -rhat with steady gains L = [L1; L2].

    States (xhat, shat): A_g = [[A, -L1 H'], [0, F - L2 H']], B_g = [L1; L2],
    output [-C', 0], no feedthrough.
    """
    k, m = aug.n_enc, aug.m_ch
    L1, L2 = L[:k], L[k:]
    Ag = np.zeros((k + m, k + m))
    Ag[:k, :k] = aug.A
    Ag[:k, k:] = -np.outer(L1, aug.H)
    Ag[k:, k:] = aug.F - np.outer(L2, aug.H)
    Cg = np.concatenate((-aug.C, np.zeros(m)))
    return StateSpaceRealization(A_mat=Ag, B_vec=L.copy(), C_vec=Cg, D=0.0)
