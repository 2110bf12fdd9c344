"""Structural properties of the optimal loop as numeric residuals."""

import logging
from typing import Callable, Dict, Optional, Tuple, Union

import numpy as np

from ..channel.spec import ChannelSpec
from ..coding.encoder import EncoderSpec
from ..coding.precode import LinearPolicy, mmse_precode
from ..coding.transmission import control_system, estimation_system, transmit
from ..errors import DimensionMismatch
from ..kalman.riccati import AugmentedSystem
from ..kalman.steady import riccati_steady_iterate
from ..limits.information import allpass_flatness, directed_information
from ..utils.linalg import numerical_rank, spectral_radius
from .covariance import CovarianceLedger, policy_ledger

logger = logging.getLogger(__name__)

Signals = Union[np.ndarray, Dict[str, np.ndarray]]
LinearSystem = Callable[[np.ndarray], Signals]


def check_orthogonality(ledger: CovarianceLedger) -> float:
    """max |E u_t y_s| and |E u_t e_s| over s < t."""
    if ledger.horizon == 0:
        return 0.0
    return float(max(np.max(np.abs(np.tril(ledger.K_uy, -1))),
                     np.max(np.abs(np.tril(ledger.K_ue, -1)))))


def check_ma_banded(ledger: CovarianceLedger, m: int) -> float:
    """max |K_ycheck(i, j)| over |i - j| >= m + 1."""
    K = ledger.K_ycheck
    i, j = np.indices(K.shape)
    outside = np.abs(i - j) >= m + 1
    return float(np.max(np.abs(K[outside]))) if np.any(outside) else 0.0


def check_predictor_reduction(policy: LinearPolicy, channel: ChannelSpec,
                              T: int) -> Tuple[float, float]:
    """(|I(u->y) before - after|, power before - power after) for the precoded policy."""
    before = policy_ledger(policy.Gamma, policy.G_T, channel, T)
    precoded = mmse_precode(policy, channel, T)
    after = policy_ledger(precoded.Gamma, precoded.G_T, channel, T)
    delta_rate = abs(directed_information(before) - directed_information(after))
    return float(delta_rate), before.power - after.power


def _as_dict(signals: Signals) -> Dict[str, np.ndarray]:
    if isinstance(signals, dict):
        return {k: np.asarray(v, dtype=float) for k, v in signals.items()}
    return {"output": np.asarray(signals, dtype=float)}


def check_t_equivalence(system_a: LinearSystem, system_b: LinearSystem, T: int,
                        input_dim: Optional[int] = None) -> float:
    """Drive both systems with every standard basis vector of the input space.

    Returns the largest deviation of shared outputs, each entry scaled by
    max(1, |a|, |b|) so growing states compare at working precision.

    Raises:
        DimensionMismatch: the systems emit outputs of different shapes.
    """
    dim = input_dim if input_dim is not None else T + 1
    worst = 0.0
    for i in range(dim):
        drive = np.zeros(dim)
        drive[i] = 1.0
        out_a, out_b = _as_dict(system_a(drive)), _as_dict(system_b(drive))
        shared = sorted(set(out_a) & set(out_b))
        if not shared:
            raise DimensionMismatch("the two systems share no output signal")
        for key in shared:
            a, b = out_a[key], out_b[key]
            if a.shape != b.shape:
                raise DimensionMismatch(f"output '{key}' has shapes {a.shape} and {b.shape}")
            scale = np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))
            worst = max(worst, float(np.max(np.abs(a - b) / scale)) if a.size else 0.0)
    return worst


_FORMS = {"coding": transmit, "estimation": estimation_system, "control": control_system}


def closed_loop_system(form: str, encoder: EncoderSpec, channel: ChannelSpec, T: int,
                       signals=("u", "e", "rhat", "xhat")) -> LinearSystem:
    """Closed loop in the named form as a map from (W; N) to the chosen signals."""
    if form not in _FORMS:
        raise ValueError(f"unknown form '{form}', expected one of {sorted(_FORMS)}")
    run = _FORMS[form]
    k = encoder.dim

    def system(drive: np.ndarray) -> Dict[str, np.ndarray]:
        if drive.size != k + T + 1:
            raise DimensionMismatch(f"input must have {k + T + 1} entries, got {drive.size}")
        transcript = run(encoder, channel, drive[:k], drive[k:], T)
        return {name: getattr(transcript, name) for name in signals}

    return system


def check_steady_structure(encoder: EncoderSpec, channel: ChannelSpec,
                           points: int = 512) -> Dict[str, float]:
    """Closed-loop radius, rank(Sigma_inf) against the unstable count, all-pass
    flatness of T_Ne and K_e,inf against DI(A)^2.

    Raises:
        AssumptionA2Violated: A has an eigenvalue on the unit circle or shared with F.
    """
    steady = riccati_steady_iterate(encoder, channel)
    aug = AugmentedSystem.from_encoder(encoder, channel)
    di = encoder.degree_of_instability()
    report = {
        "closed_loop_radius": spectral_radius(aug.closed_loop(steady.L)),
        "sigma_rank": float(numerical_rank(steady.Sigma)),
        "unstable_count": float(len(encoder.unstable_eigenvalues())),
        "allpass_flatness": allpass_flatness(aug, steady.L, di, points),
        "ke_inf": steady.Ke,
        "di": di,
        "ke_relative_error": abs(steady.Ke - di * di) / (di * di),
    }
    logger.debug(f"Steady structure: {report}")
    return report
