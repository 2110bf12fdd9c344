"""Rate, power, estimation and Bode-type quantities of the feedback loop.

All values are in nats and are totals over t = 0..T unless the name says
otherwise; per-use rates divide by T + 1.
"""

import logging
from typing import TYPE_CHECKING, NamedTuple, Optional, Tuple, Union

import numpy as np
import scipy.linalg as la

from ..channel.realization import StateSpaceRealization, channel_state_space, unit_circle_grid
from ..channel.spec import ChannelSpec
from ..channel.toeplitz import toeplitz_bundle
from ..coding.encoder import EncoderSpec
from ..coding.generator import FeedbackGenerator, steady_feedback_realization
from ..errors import DegenerateCovariance, DimensionMismatch
from ..kalman.riccati import AugmentedSystem, RiccatiTrajectory
from ..kalman.smoother import information_factors
from ..utils.linalg import logdet_pd, observability_matrix, orthogonal_residual, symmetrize

if TYPE_CHECKING:
    from ..properties.covariance import CovarianceLedger

logger = logging.getLogger(__name__)

GRID_POINTS = 512
DEGENERATE_VARIANCE = 1e-14


class EstimationBounds(NamedTuple):
    """Half log-determinants of the FIM, CRB^{-1} and MMSE_W^{-1}, plus MMSE_W."""

    logdet_fim: float
    logdet_crb_inv: float
    logdet_mmse_inv: float
    mmseW: np.ndarray


def _message_output_map(encoder: EncoderSpec, channel: ChannelSpec, T: int) -> np.ndarray:
    return toeplitz_bundle(channel, T).Zinv_T @ encoder.gamma(T)


def mutual_information_toeplitz(encoder: EncoderSpec, channel: ChannelSpec, T: int) -> float:
    """(1/2) log det(I + Zinv Gamma Gamma' Zinv'), independent of the generator.

    With B = Zinv Gamma of size (T+1) x (n+1), det(I + B B') = det(I + B'B);
    the smaller of the two is factored, through the triangular factor of B
    when n + 1 < T + 1.
    """
    B = _message_output_map(encoder, channel, T)
    if B.shape[0] <= B.shape[1]:
        return 0.5 * logdet_pd(np.eye(B.shape[0]) + B @ B.T)
    R = la.qr(B, mode="economic")[1]
    return 0.5 * logdet_pd(np.eye(B.shape[1]) + R.T @ R)


def directed_information(ledger: "CovarianceLedger", T: Optional[int] = None) -> float:
    """sum_t (1/2) log(var(y_t | y^{t-1}) / var(y_t | y^{t-1}, u^t)).

    Conditional variances are squared norms of residuals of the linear maps,
    since (W; N) has identity covariance.

    Raises:
        DegenerateCovariance: a conditional variance is numerically zero.
    """
    horizon = ledger.horizon if T is None else T
    if horizon > ledger.horizon:
        raise DimensionMismatch(f"ledger covers horizon {ledger.horizon}, need {horizon}")
    M_y, M_u = ledger.M_y, ledger.M_u
    total = 0.0
    for t in range(horizon + 1):
        past = M_y[:t]
        v_out = float(np.sum(orthogonal_residual(M_y[t], past) ** 2))
        v_noise = float(np.sum(orthogonal_residual(M_y[t], np.vstack((past, M_u[:t + 1]))) ** 2))
        if v_noise <= DEGENERATE_VARIANCE or v_out <= DEGENERATE_VARIANCE:
            raise DegenerateCovariance(
                f"conditional variance of y_{t} is numerically zero "
                f"({v_out:.3e}, {v_noise:.3e})")
        total += 0.5 * np.log(v_out / v_noise)
    return float(total)


def innovations_rate(traj: RiccatiTrajectory, T: Optional[int] = None) -> float:
    """(1/2) sum_t log K_e,t."""
    horizon = traj.horizon if T is None else T
    return 0.5 * float(np.sum(np.log(traj.Ke[:horizon + 1])))


def bode_integral(source: Union[np.ndarray, RiccatiTrajectory]) -> float:
    """BI_T = (1/2) sum_i log lambda_i(K_y).

    A trajectory gives the same value through det K_y = prod_t K_e,t.
    """
    if isinstance(source, RiccatiTrajectory):
        return innovations_rate(source)
    lam = np.linalg.eigvalsh(symmetrize(np.asarray(source, dtype=float)))
    if lam.size and lam[0] <= 0.0:
        raise DegenerateCovariance(f"K_y is not positive definite (min eigenvalue {lam[0]:.3e})")
    return 0.5 * float(np.sum(np.log(lam)))


def _sensitivity(generator: FeedbackGenerator, channel: ChannelSpec,
                 T: int) -> Tuple[np.ndarray, np.ndarray]:
    if generator.horizon != T:
        raise DimensionMismatch(f"generator covers horizon {generator.horizon}, need {T}")
    Zinv = toeplitz_bundle(channel, T).Zinv_T
    loop = Zinv @ generator.G_T
    S = la.solve_triangular(np.eye(T + 1) - loop, np.eye(T + 1), lower=True, unit_diagonal=True)
    return S, loop


def sensitivity_sum_check(generator: FeedbackGenerator, channel: ChannelSpec, T: int) -> float:
    """sum_i log lambda_i(S S') with S = (I - Zinv G)^{-1}; zero for every generator.

    Evaluated as 2 log |det S| from an LU factorization of S.
    """
    S, _ = _sensitivity(generator, channel, T)
    return 2.0 * float(np.linalg.slogdet(S)[1])


def complementary_sensitivity_check(generator: FeedbackGenerator, channel: ChannelSpec,
                                    T: int) -> float:
    """max |S - T_c - I| with T_c = Zinv G S."""
    S, loop = _sensitivity(generator, channel, T)
    return float(np.max(np.abs(S - loop @ S - np.eye(T + 1))))


def fim_crb_mmse(encoder: EncoderSpec, channel: ChannelSpec, T: int,
                 traj: Optional[RiccatiTrajectory] = None) -> EstimationBounds:
    """Bayesian FIM I + Gamma' Zinv' Zinv Gamma, its inverse, and the recursive MMSE_W.

    With ``traj`` the MMSE term comes from the smoother recursion (information
    form); otherwise from the closed form.
    """
    B = _message_output_map(encoder, channel, T)
    fim = symmetrize(np.eye(encoder.dim) + B.T @ B)
    crb = la.cho_solve(la.cho_factor(fim, lower=True), np.eye(encoder.dim))
    logdet_fim = 0.5 * logdet_pd(fim)
    logdet_crb_inv = -0.5 * logdet_pd(symmetrize(crb))
    if traj is None:
        return EstimationBounds(logdet_fim, logdet_crb_inv, logdet_crb_inv, symmetrize(crb))
    R = information_factors(traj)[T + 1]
    Rinv = la.solve_triangular(R, np.eye(encoder.dim), lower=False)
    logdet_mmse_inv = float(np.sum(np.log(np.abs(np.diag(R)))))
    return EstimationBounds(logdet_fim, logdet_crb_inv, logdet_mmse_inv, symmetrize(Rinv @ Rinv.T))


def average_power(traj: RiccatiTrajectory,
                  encoder: Optional[EncoderSpec] = None) -> Tuple[float, float]:
    """(1/(T+1)) sum D_bb' Sigma_t D_bb and (1/(T+1)) sum C'A^t MMSE_{W,t-1} A^t' C."""
    aug = traj.aug
    A = aug.A if encoder is None else encoder.A
    C = aug.C if encoder is None else encoder.C
    size = traj.horizon + 1
    power_analytic = float(np.mean(traj.input_variances()))
    rows = observability_matrix(A, C, size)
    factors = information_factors(traj)
    pmmse = 0.0
    for t in range(size):
        x = la.solve_triangular(factors[t], rows[t], trans="T", lower=False)
        pmmse += float(x @ x)
    return power_analytic, pmmse / size


def sensitivity_response(aug: AugmentedSystem, L: np.ndarray, channel: ChannelSpec,
                         points: int = GRID_POINTS) -> np.ndarray:
    """S(e^{j theta}) = 1 / (1 - Zinv G_inf) on the unit-circle grid."""
    theta = unit_circle_grid(points)
    gen = steady_feedback_realization(aug, L)
    z = np.exp(1j * theta)
    return 1.0 / (1.0 - channel_state_space(channel).transfer(z) * gen.transfer(z))


def bode_frequency_integral(aug: AugmentedSystem, L: np.ndarray, channel: ChannelSpec,
                            points: int = GRID_POINTS) -> float:
    """(1/2pi) integral of log |S| by the periodic trapezoidal rule."""
    return float(np.mean(np.log(np.abs(sensitivity_response(aug, L, channel, points)))))


def noise_to_innovation(aug: AugmentedSystem, L: np.ndarray) -> StateSpaceRealization:
    """T_Ne(z) = 1 - C_bb'(zI - A_cl)^{-1} L."""
    return StateSpaceRealization(A_mat=aug.closed_loop(L), B_vec=-np.asarray(L, dtype=float),
                                 C_vec=aug.Cbb.copy(), D=1.0)


def allpass_flatness(aug: AugmentedSystem, L: np.ndarray, level: float,
                     points: int = GRID_POINTS) -> float:
    """max over the grid of | |T_Ne(e^{j theta})| - level |."""
    response = noise_to_innovation(aug, L).transfer(np.exp(1j * unit_circle_grid(points)))
    return float(np.max(np.abs(np.abs(response) - level)))
