"""Exact second moments of the linear Gaussian closed loop.

Every signal is a linear map of xi = (W; N_0..N_T) ~ N(0, I), so second
moments are products of the maps and nothing is sampled. With the
Kalman-filter generator the maps come from the control form, whose error
state stays bounded; any other generator uses

    u = (I - G Zinv)^{-1} (Gamma W + G N),  y = Zinv u + N

and the innovations are read off the LDL' factorization of K_y.
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
import scipy.linalg as la

from ..channel.spec import ChannelSpec
from ..channel.toeplitz import toeplitz_bundle
from ..coding.encoder import EncoderSpec
from ..coding.generator import FeedbackGenerator
from ..errors import DimensionMismatch, NotPSD
from ..kalman.riccati import RiccatiTrajectory
from ..utils.linalg import symmetrize

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class CovarianceLedger:
    """Second moments over t = 0..T and the maps they come from.

    ``M_u``, ``M_y``, ``M_e`` and ``M_r`` have one row per time step and one
    column per entry of (W; N). ``K_e`` holds the innovation variances.
    """

    M_u: np.ndarray
    M_y: np.ndarray
    M_e: np.ndarray
    M_r: np.ndarray
    K_uy: np.ndarray
    K_ue: np.ndarray
    K_y: np.ndarray
    K_ycheck: np.ndarray
    K_e: np.ndarray
    n_enc: int

    @property
    def horizon(self) -> int:
        return self.K_y.shape[0] - 1

    @property
    def power(self) -> float:
        """(1/(T+1)) E sum u_t^2."""
        return float(np.sum(self.M_u ** 2)) / self.M_u.shape[0]


def closed_loop_maps(Gamma: np.ndarray, G_T: np.ndarray,
                     Zinv: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """(M_u, M_y) for u = Gamma W + G y, y = Zinv u + N with any strictly lower G."""
    size = G_T.shape[0]
    if Gamma.shape[0] != size or Zinv.shape != (size, size):
        raise DimensionMismatch(
            f"Gamma {Gamma.shape}, G {G_T.shape} and Zinv {Zinv.shape} do not match")
    drive = np.hstack((Gamma, G_T))
    # I - G Zinv is unit lower triangular
    M_u = la.solve_triangular(np.eye(size) - G_T @ Zinv, drive, lower=True, unit_diagonal=True)
    M_y = Zinv @ M_u + np.hstack((np.zeros_like(Gamma), np.eye(size)))
    return M_u, M_y


def kalman_closed_loop_maps(traj: RiccatiTrajectory,
                            T: int) -> Tuple[np.ndarray, np.ndarray]:
    """(M_u, M_e) from the control form driven by the columns of (W; N)."""
    aug = traj.aug
    k, size = aug.n_enc, T + 1
    cols = k + size
    X = np.zeros((aug.dim, cols))
    X[:k, :k] = np.eye(k)
    M_u = np.empty((size, cols))
    M_e = np.empty((size, cols))
    for t in range(size):
        M_u[t] = aug.Dbb @ X
        M_e[t] = aug.Cbb @ X
        M_e[t, k + t] += 1.0
        X = aug.closed_loop(traj.L[t]) @ X
        X[:, k + t] -= traj.L[t]
    return M_u, M_e


def innovation_map(M_y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Innovations e = L^{-1} y from K_y = L D L' (L unit lower); returns (M_e, diag D)."""
    K_y = symmetrize(M_y @ M_y.T)
    try:
        R = la.cholesky(K_y, lower=True)
    except la.LinAlgError as exc:
        raise NotPSD(float(np.min(np.linalg.eigvalsh(K_y))),
                     f"output covariance is not positive definite: {exc}") from exc
    d = np.diag(R)
    M_e = d[:, None] * la.solve_triangular(R, M_y, lower=True)
    return M_e, d ** 2


def _ledger(M_u: np.ndarray, M_y: np.ndarray, M_e: np.ndarray, M_r: np.ndarray,
            K_e: np.ndarray, Zz: np.ndarray, n_enc: int) -> CovarianceLedger:
    K_y = symmetrize(M_y @ M_y.T)
    M_check = Zz @ M_y
    return CovarianceLedger(
        M_u=M_u, M_y=M_y, M_e=M_e, M_r=M_r,
        K_uy=M_u @ M_y.T,
        K_ue=M_u @ M_e.T,
        K_y=K_y,
        K_ycheck=symmetrize(M_check @ M_check.T),
        K_e=K_e,
        n_enc=n_enc,
    )


def policy_ledger(Gamma: np.ndarray, G_T: np.ndarray, channel: ChannelSpec,
                  T: int) -> CovarianceLedger:
    """Ledger of the policy u = Gamma W + G_T y (Gamma is (T+1) x k)."""
    bundle = toeplitz_bundle(channel, T)
    M_u, M_y = closed_loop_maps(Gamma, G_T, bundle.Zinv_T)
    M_e, K_e = innovation_map(M_y)
    M_r = np.hstack((Gamma, np.zeros((T + 1, T + 1))))
    return _ledger(M_u, M_y, M_e, M_r, K_e, bundle.Zz_T, Gamma.shape[1])


def covariance_engine(encoder: EncoderSpec, generator: FeedbackGenerator,
                      channel: ChannelSpec, T: int) -> CovarianceLedger:
    """All second moments of the closed loop (encoder, generator, channel) over 0..T.

    Raises:
        DimensionMismatch: the generator does not cover horizon T.
    """
    if generator.horizon != T:
        raise DimensionMismatch(f"generator covers horizon {generator.horizon}, need {T}")
    traj = generator.kf_form
    if traj is None or traj.horizon != T:
        return policy_ledger(encoder.gamma(T), generator.G_T, channel, T)

    bundle = toeplitz_bundle(channel, T)
    k, size = encoder.dim, T + 1
    M_u, M_e = kalman_closed_loop_maps(traj, T)
    M_y = bundle.Zinv_T @ M_u + np.hstack((np.zeros((size, k)), np.eye(size)))
    M_r = np.hstack((encoder.gamma(T), np.zeros((size, size))))
    K_e = np.sum(M_e ** 2, axis=1)
    logger.debug(f"Covariance ledger from the Kalman form, n={encoder.n} m={channel.m} T={T}")
    return _ledger(M_u, M_y, M_e, M_r, K_e, bundle.Zz_T, k)
