"""Fixed-point smoothing of the initial condition W = x_0.

The innovation e_t is white with variance K_e,t, and its covariance with W is
h_t = [I 0] Phi(t)' C_bb (the error state starts at (W; 0) with covariance
diag(I, 0)). Hence

    xhat_{0,t} = xhat_{0,t-1} + h_t e_t / K_e,t.

The posterior information J_t = MMSE_{W,t}^{-1} is carried in square-root
form. Given W and y^{t-1} the channel state is known, so var(e_t | W, y^{t-1})
is the unit noise variance and

    J_t = J_{t-1} + c_t c_t',   J_{-1} = I,

where c_t' = C_bb' A_bb^t [I; 0] is the noise-free response to W. The update
only adds, so J_t stays positive definite when MMSE_{W,t} decays like a^{-2t}.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from ..utils.linalg import symmetrize
from .riccati import AugmentedSystem, RiccatiTrajectory


@dataclass(frozen=True, eq=False)
class SmootherState:
    """Running estimate xhat_{0,t} and the square-root information factor of W."""

    xhat0: np.ndarray
    info_factor: np.ndarray

    @classmethod
    def initial(cls, dim: int) -> "SmootherState":
        return cls(xhat0=np.zeros(dim), info_factor=np.eye(dim))

    @property
    def mmseW(self) -> np.ndarray:
        k = self.info_factor.shape[0]
        Rinv = la.solve_triangular(self.info_factor, np.eye(k), lower=False)
        return symmetrize(Rinv @ Rinv.T)


def smoother_gain(traj: RiccatiTrajectory, t: int) -> np.ndarray:
    """Cov(W, e_t) = [I 0] Phi(t)' C_bb."""
    k = traj.aug.n_enc
    return (traj.Phi[t].T @ traj.aug.Cbb)[:k]


def fixed_point_smoother_step(state: SmootherState, traj: RiccatiTrajectory, t: int,
                              e_t: float) -> SmootherState:
    xhat0 = state.xhat0 + smoother_gain(traj, t) * (e_t / traj.Ke[t])
    return SmootherState(xhat0=xhat0, info_factor=information_step(state, traj, t))


def information_step(state: SmootherState, traj: RiccatiTrajectory, t: int) -> np.ndarray:
    return information_update(state.info_factor, response_row(traj.aug, t))


def mmse_W_update(state: SmootherState, traj: RiccatiTrajectory, t: int) -> np.ndarray:
    """MMSE_{W,t} from the state holding MMSE_{W,t-1}."""
    return SmootherState(xhat0=state.xhat0, info_factor=information_step(state, traj, t)).mmseW


def smooth(traj: RiccatiTrajectory, e: np.ndarray) -> np.ndarray:
    """Path xhat_{0,t}, t = 0..len(e)-1, for a single innovation sequence."""
    state = SmootherState.initial(traj.aug.n_enc)
    path = np.empty((len(e), traj.aug.n_enc))
    for t, e_t in enumerate(e):
        state = fixed_point_smoother_step(state, traj, t, float(e_t))
        path[t] = state.xhat0
    return path


def smoother_gains(traj: RiccatiTrajectory) -> np.ndarray:
    """h_t / K_e,t stacked for t = 0..T; rows act on innovations."""
    k = traj.aug.n_enc
    H = np.einsum("tji,j->ti", traj.Phi, traj.aug.Cbb)[:, :k]
    return H / traj.Ke[:, None]


def message_response(aug: AugmentedSystem, T: int) -> np.ndarray:
    """Rows c_t' = C_bb' A_bb^t [I; 0] for t = 0..T (the rows of Zinv Gamma)."""
    V = np.zeros((aug.dim, aug.n_enc))
    V[:aug.n_enc] = np.eye(aug.n_enc)
    rows = np.empty((T + 1, aug.n_enc))
    for t in range(T + 1):
        rows[t] = aug.Cbb @ V
        V = aug.Abb @ V
    return rows


def response_row(aug: AugmentedSystem, t: int) -> np.ndarray:
    """c_t' = C_bb' A_bb^t [I; 0]."""
    return aug.Cbb @ np.linalg.matrix_power(aug.Abb, t)[:, :aug.n_enc]


def information_factors(traj: RiccatiTrajectory) -> np.ndarray:
    """Upper-triangular R_t with R_t' R_t = MMSE_{W,t-1}^{-1}, t = 0..T+1.

    Each step appends c_t' to R and re-triangularizes with a QR factorization.
    """
    k = traj.aug.n_enc
    rows = message_response(traj.aug, traj.horizon)
    out = np.empty((traj.horizon + 2, k, k))
    R = np.eye(k)
    out[0] = R
    for t, c in enumerate(rows):
        R = information_update(R, c)
        out[t + 1] = R
    return out


def information_update(R: np.ndarray, c: np.ndarray) -> np.ndarray:
    """R_t from R_{t-1} and the response row c_t (unit conditional variance)."""
    k = R.shape[0]
    return la.qr(np.vstack((R, c)), mode="r")[0][:k]


def information_path(traj: RiccatiTrajectory) -> np.ndarray:
    """MMSE_{W,t-1}^{-1} for t = 0..T+1 (entry 0 is I)."""
    R = information_factors(traj)
    return np.einsum("tki,tkj->tij", R, R)


def mmse_path(traj: RiccatiTrajectory) -> np.ndarray:
    """MMSE_{W,t-1} for t = 0..T+1 (entry 0 is the prior I)."""
    return np.stack([SmootherState(xhat0=np.zeros(R.shape[0]), info_factor=R).mmseW
                     for R in information_factors(traj)])


def inverse_power_step(xhat0_prev: np.ndarray, traj: RiccatiTrajectory, t: int,
                       e_t: float) -> np.ndarray:
    """xhat_{0,t-1} + A^{-t-1} L_{1,t} e_t; needs invertible A, moderate t."""
    A = traj.aug.A
    return xhat0_prev + np.linalg.matrix_power(np.linalg.inv(A), t + 1) @ traj.L1(t) * e_t


def mmse_W_inverse_power(traj: RiccatiTrajectory, t: int) -> np.ndarray:
    """A^{-t-1} Sigma_{x,t+1} A^{-t-1}'; needs invertible A, moderate t."""
    Ainv = np.linalg.matrix_power(np.linalg.inv(traj.aug.A), t + 1)
    return symmetrize(Ainv @ traj.Sigma_x(t + 1) @ Ainv.T)
