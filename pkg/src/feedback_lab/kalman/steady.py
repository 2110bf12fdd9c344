"""Steady-state Riccati solutions: plain iteration and the Sylvester transform."""

import logging
from typing import TYPE_CHECKING, NamedTuple, Tuple

import numpy as np
import scipy.linalg as la

from ..channel.realization import channel_state_space
from ..channel.spec import ChannelSpec
from ..errors import AssumptionA2Violated, NoConvergence
from ..utils.linalg import numerical_rank, solve_sylvester_kron, spectral_radius, symmetrize
from .riccati import AugmentedSystem, riccati_step

if TYPE_CHECKING:
    from ..coding.encoder import EncoderSpec

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-11
DEFAULT_MAX_ITER = 20000
A2_TOL = 1e-9


class SteadyState(NamedTuple):
    Sigma: np.ndarray
    L: np.ndarray
    Ke: float


def check_assumption_a2(encoder: "EncoderSpec", channel: ChannelSpec) -> None:
    """Raise AssumptionA2Violated for unit-circle or channel-shared eigenvalues.

    Observability of (A, C') is already enforced when the encoder is built.
    """
    lam_A = np.linalg.eigvals(encoder.A)
    for lam in lam_A:
        if abs(abs(lam) - 1.0) < A2_TOL:
            raise AssumptionA2Violated(
                f"eigenvalue {lam:.12g} of A lies on the unit circle "
                f"(|lambda| = {abs(lam):.12g})", eigenvalue=complex(lam))
    F = channel_state_space(channel).A_mat
    if F.size:
        for lam in lam_A:
            for mu in np.linalg.eigvals(F):
                if abs(lam - mu) < A2_TOL:
                    raise AssumptionA2Violated(
                        f"eigenvalue {lam:.12g} of A coincides with channel eigenvalue "
                        f"{mu:.12g}", eigenvalue=complex(lam), other=complex(mu))


def steady_gains(Sigma: np.ndarray, aug: AugmentedSystem) -> Tuple[np.ndarray, float]:
    Ke = float(aug.Cbb @ Sigma @ aug.Cbb) + 1.0
    return aug.Abb @ Sigma @ aug.Cbb / Ke, Ke


def _iterate(aug: AugmentedSystem, Sigma: np.ndarray, tol: float, max_iter: int,
             what: str) -> Tuple[np.ndarray, int]:
    residual = np.inf
    for it in range(1, max_iter + 1):
        Sigma_next, _, _ = riccati_step(Sigma, aug)
        residual = float(np.max(np.abs(Sigma_next - Sigma))) if Sigma.size else 0.0
        Sigma = Sigma_next
        if residual < tol:
            return Sigma, it
    raise NoConvergence(max_iter, residual, what)


def riccati_steady_iterate(encoder: "EncoderSpec", channel: ChannelSpec,
                           tol: float = DEFAULT_TOL,
                           max_iter: int = DEFAULT_MAX_ITER) -> SteadyState:
    """Iterate the recursion from diag(I, 0) until the max-norm step is below ``tol``."""
    check_assumption_a2(encoder, channel)
    aug = AugmentedSystem.from_encoder(encoder, channel)
    Sigma, iterations = _iterate(aug, aug.initial_covariance(), tol, max_iter,
                                 "steady-state Riccati iteration")
    L, Ke = steady_gains(Sigma, aug)
    logger.debug(f"Steady Riccati converged in {iterations} iterations, "
                 f"rank(Sigma)={numerical_rank(Sigma)}, "
                 f"rho(A_cl)={spectral_radius(aug.closed_loop(L)):.6f}")
    return SteadyState(Sigma=Sigma, L=L, Ke=Ke)


def sylvester_solve(F, A, G, C) -> np.ndarray:
    """psi with F psi - psi A = -G C'.

    Raises:
        SingularSylvester: F and A share an eigenvalue.
    """
    F = np.atleast_2d(np.asarray(F, dtype=float)) if np.size(F) else np.zeros((0, 0))
    A = np.atleast_2d(np.asarray(A, dtype=float))
    G = np.asarray(G, dtype=float).reshape(-1)
    C = np.asarray(C, dtype=float).reshape(-1)
    return solve_sylvester_kron(F, A, -np.outer(G, C))


def stable_antistable_split(A: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Real similarity A = V diag(A_plus, A_minus) V^{-1}.

    A_plus carries the eigenvalues outside the unit circle, A_minus the rest.
    Complex pairs stay in real 2x2 blocks.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    T, Z, sdim = la.schur(A, output="real", sort="ouc")
    T11, T12, T22 = T[:sdim, :sdim], T[:sdim, sdim:], T[sdim:, sdim:]
    X = solve_sylvester_kron(T11, T22, -T12)
    P = np.eye(A.shape[0])
    P[:sdim, sdim:] = X
    return Z @ P, T11, T22


def _reduced_dare(A: np.ndarray, C: np.ndarray, tol: float, max_iter: int) -> np.ndarray:
    """Steady covariance of the measurement-only filter on (A, C') from Sigma = I."""
    k = A.shape[0]
    Sigma = np.eye(k)
    residual = np.inf
    for it in range(1, max_iter + 1):
        ASC = A @ Sigma @ C
        Sigma_next = symmetrize(A @ Sigma @ A.T - np.outer(ASC, ASC) / (C @ Sigma @ C + 1.0))
        residual = float(np.max(np.abs(Sigma_next - Sigma)))
        Sigma = Sigma_next
        if residual < tol:
            logger.debug(f"Reduced-order Riccati converged in {it} iterations")
            return Sigma
    raise NoConvergence(max_iter, residual, "reduced-order Riccati iteration")


def riccati_steady_transform(encoder: "EncoderSpec", channel: ChannelSpec,
                             tol: float = DEFAULT_TOL,
                             max_iter: int = DEFAULT_MAX_ITER) -> np.ndarray:
    """Steady covariance through the Sylvester change of coordinates.

    The stable part of A (if any) is first split off and folded into the
    channel state. With psi solving F psi - psi A_+ = -G C_+', the
    coordinates (x, s - psi x) decouple the deterministic stable state, so
    only a Riccati equation on A_+ with output C_+ + psi' H remains.
    """
    check_assumption_a2(encoder, channel)
    ch = channel_state_space(channel)
    k, m = encoder.dim, ch.dim

    V, A_plus, A_minus = stable_antistable_split(encoder.A)
    kp, km = A_plus.shape[0], A_minus.shape[0]
    if kp == 0:
        return np.zeros((k + m, k + m))
    C_new = V.T @ encoder.C
    C_plus, C_minus = C_new[:kp], C_new[kp:]

    # stable encoder modes join the channel state
    F_hat = np.zeros((km + m, km + m))
    F_hat[:km, :km] = A_minus
    F_hat[km:, :km] = np.outer(ch.B_vec, C_minus)
    F_hat[km:, km:] = ch.A_mat
    G_hat = np.concatenate((np.zeros(km), ch.B_vec))
    H_hat = np.concatenate((C_minus, ch.C_vec))

    psi = sylvester_solve(F_hat, A_plus, G_hat, C_plus)
    C_tilde = C_plus + psi.T @ H_hat
    S11 = _reduced_dare(A_plus, C_tilde, tol, max_iter)

    Sigma_split = np.zeros((k + m, k + m))
    Sigma_split[:kp, :kp] = S11
    Sigma_split[:kp, kp:] = S11 @ psi.T
    Sigma_split[kp:, :kp] = psi @ S11
    Sigma_split[kp:, kp:] = psi @ S11 @ psi.T

    M = np.eye(k + m)
    M[:k, :k] = V
    return symmetrize(M @ Sigma_split @ M.T)

