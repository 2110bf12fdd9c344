"""Closed-loop transmission in the coding, estimation and control forms."""

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np

from ..channel.realization import channel_state_space, simulate_channel
from ..channel.spec import ChannelSpec
from ..channel.toeplitz import toeplitz_bundle
from ..errors import DimensionMismatch, MessageRangeError
from ..kalman.riccati import RiccatiTrajectory, riccati_run
from ..kalman.smoother import smooth
from ..utils.exports import write_csv
from ..utils.linalg import as_vector
from .encoder import EncoderSpec, message_direction
from .generator import FeedbackGenerator

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Transcript:
    """One closed-loop run over t = 0..T.

    ``xhat`` holds the one-step predictions of the encoder state and
    ``xhat0_path`` the fixed-point estimates of W after each output.
    """

    u: np.ndarray
    y: np.ndarray
    e: np.ndarray
    r: np.ndarray
    rhat: np.ndarray
    xhat: np.ndarray
    xhat0_path: np.ndarray
    W: np.ndarray
    decoded: Optional[int] = None

    @property
    def horizon(self) -> int:
        return int(self.u.size - 1)

    @property
    def power_empirical(self) -> float:
        return float(np.mean(self.u ** 2))

    def max_identity_violation(self) -> float:
        """max |u_t - (r_t - rhat_t)|."""
        return float(np.max(np.abs(self.u - (self.r - self.rhat))))


def _check_inputs(encoder: EncoderSpec, W, noise, T: int) -> Tuple[np.ndarray, np.ndarray]:
    W = as_vector(W, "W")
    noise = as_vector(noise, "noise")
    if W.size != encoder.dim:
        raise DimensionMismatch(f"W must have {encoder.dim} entries, got {W.size}")
    if noise.size != T + 1:
        raise DimensionMismatch(f"noise must have T+1 = {T + 1} entries, got {noise.size}")
    return W, noise


def _trajectory(encoder: EncoderSpec, channel: ChannelSpec, T: int,
                generator: Optional[FeedbackGenerator]) -> RiccatiTrajectory:
    if generator is None:
        return riccati_run(encoder, channel, T)
    if generator.kf_form is None:
        raise ValueError("transmit needs the Kalman-filter generator; "
                         "use transmit_linear for arbitrary generators")
    if generator.kf_form.horizon < T:
        raise DimensionMismatch(
            f"generator covers horizon {generator.kf_form.horizon}, need {T}")
    return generator.kf_form


def _decode(encoder: EncoderSpec, xhat0: np.ndarray, message_count: Optional[int]) -> Optional[int]:
    if message_count is None:
        return None
    return decode_message(float(message_direction(encoder) @ xhat0), message_count)


def transmit(encoder: EncoderSpec, channel: ChannelSpec, W, noise_sequence, T: int,
             generator: Optional[FeedbackGenerator] = None,
             message_count: Optional[int] = None) -> Transcript:
    """Coding form of the closed loop from x_0 = W, s_0 = shat_0 = 0, xhat_0 = 0.

        r = C'x, u = r - rhat, y = H's + u + N, e = y - H'shat,
        x+ = Ax, s+ = Fs + Gu, xhat+ = A xhat + L1 e, shat+ = F shat + L2 e.
    """
    W, noise = _check_inputs(encoder, W, noise_sequence, T)
    traj = _trajectory(encoder, channel, T, generator)
    aug = traj.aug
    k, m = aug.n_enc, aug.m_ch

    x, s = W.copy(), np.zeros(m)
    xhat, shat = np.zeros(k), np.zeros(m)
    u, y, e, r, rhat = (np.empty(T + 1) for _ in range(5))
    xhat_path = np.empty((T + 1, k))
    for t in range(T + 1):
        xhat_path[t] = xhat
        r[t] = aug.C @ x
        rhat[t] = aug.C @ xhat
        u[t] = r[t] - rhat[t]
        y[t] = aug.H @ s + u[t] + noise[t]
        e[t] = y[t] - aug.H @ shat
        x = aug.A @ x
        s = aug.F @ s + aug.Gch * u[t]
        xhat = aug.A @ xhat + traj.L1(t) * e[t]
        shat = aug.F @ shat + traj.L2(t) * e[t]

    path = smooth(traj, e)
    return Transcript(u=u, y=y, e=e, r=r, rhat=rhat, xhat=xhat_path, xhat0_path=path,
                      W=W, decoded=_decode(encoder, path[-1], message_count))


def estimation_system(encoder: EncoderSpec, channel: ChannelSpec, W, noise_sequence, T: int,
                      generator: Optional[FeedbackGenerator] = None) -> Transcript:
    """Estimation form: the filter sees the open-loop output ybar = H' sbar + r + N.

    e = ybar - H' sbar_hat - rhat, sbar_hat+ = F sbar_hat + G rhat + L2 e,
    xhat+ = A xhat + L1 e. The returned ``y`` is the closed-loop channel
    output ybar - Zinv rhat.
    """
    W, noise = _check_inputs(encoder, W, noise_sequence, T)
    traj = _trajectory(encoder, channel, T, generator)
    aug = traj.aug
    k, m = aug.n_enc, aug.m_ch

    x, sbar = W.copy(), np.zeros(m)
    xhat, sbar_hat, s_rhat = np.zeros(k), np.zeros(m), np.zeros(m)
    u, y, e, r, rhat = (np.empty(T + 1) for _ in range(5))
    xhat_path = np.empty((T + 1, k))
    for t in range(T + 1):
        xhat_path[t] = xhat
        r[t] = aug.C @ x
        rhat[t] = aug.C @ xhat
        ybar = aug.H @ sbar + r[t] + noise[t]
        e[t] = ybar - aug.H @ sbar_hat - rhat[t]
        u[t] = r[t] - rhat[t]
        y[t] = ybar - (aug.H @ s_rhat + rhat[t])
        x = aug.A @ x
        sbar = aug.F @ sbar + aug.Gch * r[t]
        s_rhat = aug.F @ s_rhat + aug.Gch * rhat[t]
        sbar_hat = aug.F @ sbar_hat + aug.Gch * rhat[t] + traj.L2(t) * e[t]
        xhat = aug.A @ xhat + traj.L1(t) * e[t]

    return Transcript(u=u, y=y, e=e, r=r, rhat=rhat, xhat=xhat_path,
                      xhat0_path=smooth(traj, e), W=W)


def control_system(encoder: EncoderSpec, channel: ChannelSpec, W, noise_sequence, T: int,
                   generator: Optional[FeedbackGenerator] = None) -> Transcript:
    """Control form on the error state X = (x - xhat; s - shat):

        X+ = (A_bb - L C_bb') X - L N,  e = C_bb' X + N,  u = D_bb' X.
    """
    W, noise = _check_inputs(encoder, W, noise_sequence, T)
    traj = _trajectory(encoder, channel, T, generator)
    aug = traj.aug
    k, m = aug.n_enc, aug.m_ch

    X = np.concatenate((W, np.zeros(m)))
    x, s = W.copy(), np.zeros(m)
    u, y, e, r, rhat = (np.empty(T + 1) for _ in range(5))
    xhat_path = np.empty((T + 1, k))
    for t in range(T + 1):
        e[t] = aug.Cbb @ X + noise[t]
        u[t] = aug.Dbb @ X
        r[t] = aug.C @ x
        rhat[t] = r[t] - u[t]
        xhat_path[t] = x - X[:k]
        y[t] = aug.H @ s + u[t] + noise[t]
        X = aug.closed_loop(traj.L[t]) @ X - traj.L[t] * noise[t]
        x = aug.A @ x
        s = aug.F @ s + aug.Gch * u[t]

    return Transcript(u=u, y=y, e=e, r=r, rhat=rhat, xhat=xhat_path,
                      xhat0_path=smooth(traj, e), W=W)


def sk_transmit(a: float, g: float, x0: float, noise_sequence, T: int,
                message_count: Optional[int] = None) -> Transcript:
    """Recursive scheme over the AWGN channel from xhat_{0,-1} = 0:

        u_t = g a^t (xhat_{0,t-1} - x0),
        xhat_{0,t} = ((g^2 + 1)/a^2) xhat_{0,t-1} - a^{-t-2} g y_t.

    Run on the scaled error eps_t = a^{t+1} (xhat_{0,t} - x0), which obeys

        eps_t = eps_{t-1} / a + a^{t+1} ((g^2 + 1)/a^2 - 1) x0 - g N_t / a,

    so u_t = g eps_{t-1} stays bounded when g^2 = a^2 - 1.
    """
    if a <= 1.0:
        raise ValueError(f"a must exceed 1, got {a}")
    noise = as_vector(noise_sequence, "noise")
    if noise.size != T + 1:
        raise DimensionMismatch(f"noise must have T+1 = {T + 1} entries, got {noise.size}")
    u, y, r, rhat = (np.empty(T + 1) for _ in range(4))
    xhat_path = np.empty((T + 1, 1))
    path = np.empty((T + 1, 1))
    drift = (g * g + 1.0) / (a * a) - 1.0
    if math.isclose(g * g + 1.0, a * a, rel_tol=1e-12):
        drift = 0.0  # matched gain, nonzero only through rounding of g
    eps = -x0
    for t in range(T + 1):
        at = a ** t
        xhat_path[t, 0] = at * x0 + eps
        u[t] = g * eps
        y[t] = u[t] + noise[t]
        r[t] = -g * at * x0
        rhat[t] = r[t] - u[t]
        eps = eps / a - g * noise[t] / a
        if drift:
            eps += a ** (t + 1) * drift * x0
        path[t, 0] = x0 + eps / a ** (t + 1)
    est = float(path[-1, 0])
    decoded = decode_message(est, message_count) if message_count is not None else None
    return Transcript(u=u, y=y, e=y.copy(), r=r, rhat=rhat, xhat=xhat_path,
                      xhat0_path=path, W=np.array([x0]), decoded=decoded)


def transmit_linear(encoder: EncoderSpec, G_T: np.ndarray, channel: ChannelSpec, W,
                    noise_sequence, T: int) -> Tuple[np.ndarray, np.ndarray]:
    """u = (I - G Zinv)^{-1}(Gamma W + G N) and y = Zinv u + N for any generator."""
    W, noise = _check_inputs(encoder, W, noise_sequence, T)
    G_T = np.asarray(G_T, dtype=float)
    if G_T.shape != (T + 1, T + 1):
        raise DimensionMismatch(f"generator must be {(T + 1, T + 1)}, got {G_T.shape}")
    Zinv = toeplitz_bundle(channel, T).Zinv_T
    u = np.linalg.solve(np.eye(T + 1) - G_T @ Zinv, encoder.gamma(T) @ W + G_T @ noise)
    y = simulate_channel(channel_state_space(channel), u, noise)
    return u, y


def encode_message(index: int, M_T: int) -> float:
    """Center of sub-interval ``index`` (1-based) of [-1/2, 1/2] split into M_T parts."""
    if M_T < 1:
        raise MessageRangeError(f"message count must be at least 1, got {M_T}")
    if not 1 <= index <= M_T:
        raise MessageRangeError(f"message index {index} outside 1..{M_T}")
    return -0.5 + (index - 0.5) / M_T


def decode_message(xhat0_final: float, M_T: int) -> int:
    """Index of the nearest sub-interval center; exact ties go to the lower index."""
    if M_T < 1:
        raise MessageRangeError(f"message count must be at least 1, got {M_T}")
    idx = math.ceil((float(xhat0_final) + 0.5) * M_T)
    return int(min(max(idx, 1), M_T))


def encode_messages(indices: np.ndarray, M_T: int) -> np.ndarray:
    indices = np.asarray(indices)
    if M_T < 1 or np.any(indices < 1) or np.any(indices > M_T):
        raise MessageRangeError(f"message indices outside 1..{M_T}")
    return -0.5 + (indices - 0.5) / M_T


def decode_messages(estimates: np.ndarray, M_T: int) -> np.ndarray:
    idx = np.ceil((np.asarray(estimates, dtype=float) + 0.5) * M_T)
    return np.clip(idx, 1, M_T).astype(np.int64)


def transcript_to_csv(transcript: Transcript, path: Union[str, Path]) -> Path:
    """Columns t,u,y,e,r,rhat,xhat0 (xhat0_i per coordinate when n > 0)."""
    k = transcript.xhat0_path.shape[1]
    xcols = ["xhat0"] if k == 1 else [f"xhat0_{i}" for i in range(k)]
    header = ["t", "u", "y", "e", "r", "rhat"] + xcols
    rows = (
        [t, transcript.u[t], transcript.y[t], transcript.e[t], transcript.r[t],
         transcript.rhat[t], *transcript.xhat0_path[t]]
        for t in range(transcript.horizon + 1)
    )
    return write_csv(path, header, rows)
