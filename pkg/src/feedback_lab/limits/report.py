"""Limits reports: every rate computation side by side with their residuals."""

import itertools
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from ..channel.spec import ChannelSpec
from ..coding.encoder import EncoderSpec
from ..coding.generator import FeedbackGenerator, optimal_feedback_generator
from ..kalman.riccati import AugmentedSystem, riccati_run
from ..kalman.steady import check_assumption_a2, riccati_steady_iterate, riccati_steady_transform
from ..properties.covariance import covariance_engine
from ..utils.exports import write_csv
from ..utils.linalg import logdet_pd, numerical_rank, spectral_radius
from .information import (
    GRID_POINTS,
    allpass_flatness,
    average_power,
    bode_frequency_integral,
    bode_integral,
    directed_information,
    fim_crb_mmse,
    innovations_rate,
    mutual_information_toeplitz,
)

logger = logging.getLogger(__name__)

LOG2 = math.log(2.0)
CONVERGENCE_HEADER = ["T", "rate_innov", "power_analytic", "gap_log_di"]


def to_bits(value: float) -> float:
    return value / LOG2


@dataclass
class LimitsReport:
    """Rates per channel use keyed by the formula that produced them.

    ``bi`` and the ``logdet_*`` entries are totals over the horizon; their
    per-use counterparts appear in ``rates`` as rate_bi, rate_fim, rate_crb
    and rate_mmse so that every chain member enters ``residual_matrix``.
    """

    kind: str
    horizon: Optional[int]
    rates: Dict[str, float]
    power_analytic: float
    pmmse_trace: Optional[float] = None
    bi: Optional[float] = None
    logdet_fim: Optional[float] = None
    logdet_crb_inv: Optional[float] = None
    logdet_mmse_inv: Optional[float] = None
    di: Optional[float] = None
    extras: Dict[str, float] = field(default_factory=dict)
    residual_matrix: Dict[str, Dict[str, float]] = field(default_factory=dict)

    def __post_init__(self):
        if not self.residual_matrix:
            self.residual_matrix = residual_matrix(self.rates)

    def max_residual(self) -> float:
        values = [v for row in self.residual_matrix.values() for v in row.values()]
        return max(values) if values else 0.0

    def max_relative_residual(self) -> float:
        scale = max([abs(v) for v in self.rates.values()] + [1e-300])
        return self.max_residual() / scale

    def power_residual(self) -> Optional[float]:
        if self.pmmse_trace is None:
            return None
        return abs(self.power_analytic - self.pmmse_trace)

    def to_dict(self, bits: bool = False) -> dict:
        """JSON-ready dictionary; ``bits`` converts information quantities from nats."""
        conv = to_bits if bits else (lambda v: v)
        info = {k: (None if v is None else conv(v))
                for k, v in (("bi", self.bi), ("logdet_fim", self.logdet_fim),
                             ("logdet_crb_inv", self.logdet_crb_inv),
                             ("logdet_mmse_inv", self.logdet_mmse_inv))}
        return {
            "kind": self.kind,
            "horizon": self.horizon,
            "log_base": "2" if bits else "e",
            "rates": {k: conv(v) for k, v in self.rates.items()},
            "power_analytic": self.power_analytic,
            "pmmse_trace": self.pmmse_trace,
            **info,
            "di": self.di,
            "extras": dict(self.extras),
            "residual_matrix": {k: {j: conv(v) for j, v in row.items()}
                                for k, row in self.residual_matrix.items()},
            "max_residual": conv(self.max_residual()),
        }


def residual_matrix(rates: Dict[str, float]) -> Dict[str, Dict[str, float]]:
    out: Dict[str, Dict[str, float]] = {k: {} for k in rates}
    for a, b in itertools.combinations(rates, 2):
        diff = abs(rates[a] - rates[b])
        out[a][b] = diff
        out[b][a] = diff
    return out


def finite_report(encoder: EncoderSpec, channel: ChannelSpec, T: int,
                  generator: Optional[FeedbackGenerator] = None) -> LimitsReport:
    """All finite-horizon rate forms, the two power forms and the estimation bounds."""
    if generator is None or generator.kf_form is None:
        optimal = optimal_feedback_generator(encoder, channel, T)
    else:
        optimal = generator
    traj = optimal.kf_form
    ledger = covariance_engine(encoder, generator or optimal, channel, T)
    size = T + 1

    bi = bode_integral(ledger.K_y)
    bounds = fim_crb_mmse(encoder, channel, T, traj)
    power, pmmse = average_power(traj, encoder)
    rates = {
        "rate_logdetKy": 0.5 * logdet_pd(ledger.K_y) / size,
        "rate_toeplitz": mutual_information_toeplitz(encoder, channel, T) / size,
        "rate_innov": innovations_rate(traj) / size,
        "rate_directed": directed_information(ledger) / size,
        "rate_bi": bi / size,
        "rate_fim": bounds.logdet_fim / size,
        "rate_crb": bounds.logdet_crb_inv / size,
        "rate_mmse": bounds.logdet_mmse_inv / size,
    }
    report = LimitsReport(kind="finite", horizon=T, rates=rates, power_analytic=power,
                          pmmse_trace=pmmse, bi=bi, logdet_fim=bounds.logdet_fim,
                          logdet_crb_inv=bounds.logdet_crb_inv,
                          logdet_mmse_inv=bounds.logdet_mmse_inv)
    logger.debug(f"Finite report T={T}: rate={rates['rate_innov']:.10g} "
                 f"max residual={report.max_residual():.3e}")
    return report


def steady_report(encoder: EncoderSpec, channel: ChannelSpec,
                  points: int = GRID_POINTS) -> LimitsReport:
    """Asymptotic rate (1/2) log K_e,inf against log DI(A) and the Bode frequency integral.

    The frequency integral is part of the rate chain only when the generator's
    channel block F - L2 H' is stable; otherwise it is reported in ``extras``.

    Raises:
        AssumptionA2Violated: A has an eigenvalue on the unit circle or shared with F.
    """
    check_assumption_a2(encoder, channel)
    aug = AugmentedSystem.from_encoder(encoder, channel)
    steady = riccati_steady_iterate(encoder, channel)
    Sigma_transform = riccati_steady_transform(encoder, channel)
    di = encoder.degree_of_instability()

    L2 = steady.L[aug.n_enc:]
    generator_block = aug.F - np.outer(L2, aug.H)
    bode = bode_frequency_integral(aug, steady.L, channel, points)
    rates = {"rate_innov": 0.5 * math.log(steady.Ke), "rate_di": math.log(di)}
    generator_stable = spectral_radius(generator_block) < 1.0
    if generator_stable:
        rates["rate_bode"] = bode

    extras = {
        "ke_inf": steady.Ke,
        "sigma_rank": float(numerical_rank(steady.Sigma)),
        "unstable_count": float(len(encoder.unstable_eigenvalues())),
        "closed_loop_radius": spectral_radius(aug.closed_loop(steady.L)),
        "allpass_flatness": allpass_flatness(aug, steady.L, di, points),
        "dare_agreement": float(np.max(np.abs(steady.Sigma - Sigma_transform))),
        "bode_integral": bode,
        "generator_stable": float(generator_stable),
        "grid_points": float(points),
    }
    power = float(aug.Dbb @ steady.Sigma @ aug.Dbb)
    return LimitsReport(kind="steady", horizon=None, rates=rates, power_analytic=power,
                        di=di, extras=extras)


def tradeoff_curve(channel: ChannelSpec, T: int,
                   encoders: Sequence[EncoderSpec]) -> List[Dict[str, float]]:
    """(power, rate, BI_T, (1/2) log det MMSE_W^{-1}, PMMSE) per encoder.

    The communication, estimation and control readings of the loop give the
    same curve: rate, BI_T/(T+1) and the MMSE log-determinant per use agree.
    """
    rows = []
    size = T + 1
    for encoder in encoders:
        traj = riccati_run(encoder, channel, T)
        power, pmmse = average_power(traj, encoder)
        bounds = fim_crb_mmse(encoder, channel, T, traj)
        rows.append({
            "power": power,
            "rate": mutual_information_toeplitz(encoder, channel, T) / size,
            "bi": bode_integral(traj) / size,
            "logdet_mmse_inv": bounds.logdet_mmse_inv / size,
            "pmmse": pmmse,
        })
    return rows


def convergence_rows(encoder: EncoderSpec, channel: ChannelSpec,
                     T_list: Sequence[int]) -> List[Dict[str, float]]:
    """Per-T innovations rate, analytic power and |rate - log DI(A)| from one recursion."""
    if not T_list:
        return []
    traj = riccati_run(encoder, channel, max(T_list))
    log_di = math.log(encoder.degree_of_instability())
    half_log = 0.5 * np.cumsum(np.log(traj.Ke))
    power = np.cumsum(traj.input_variances())
    rows = []
    for T in sorted(T_list):
        rate = float(half_log[T]) / (T + 1)
        rows.append({"T": int(T), "rate_innov": rate,
                     "power_analytic": float(power[T]) / (T + 1),
                     "gap_log_di": abs(rate - log_di)})
    return rows


def convergence_to_csv(rows: Sequence[Dict[str, float]], path: Union[str, Path],
                       bits: bool = False) -> Path:
    conv = to_bits if bits else (lambda v: v)
    return write_csv(path, CONVERGENCE_HEADER,
                     ([r["T"], conv(r["rate_innov"]), r["power_analytic"], conv(r["gap_log_di"])]
                      for r in rows))
