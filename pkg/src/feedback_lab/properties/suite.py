"""Property suite over a matrix of (channel, encoder, T) cases."""

import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np

from ..channel.spec import ChannelSpec, awgn, validate_channel
from ..coding.encoder import EncoderSpec
from ..coding.generator import FeedbackGenerator, optimal_feedback_generator
from ..coding.precode import LinearPolicy
from ..errors import AssumptionA2Violated
from ..limits.information import complementary_sensitivity_check, sensitivity_sum_check
from ..utils.linalg import strictly_lower
from ..utils.logging import ContextualLogger, TimedOperation
from .checks import (
    check_ma_banded,
    check_orthogonality,
    check_predictor_reduction,
    check_steady_structure,
    check_t_equivalence,
    closed_loop_system,
)
from .covariance import covariance_engine

logger = logging.getLogger(__name__)

NEGATIVE_CONTROL_SCALE = 0.3
EQUIVALENCE_TOL = 1e-10
POWER_TOL = 1e-10
STEADY_TOL = 1e-6
KE_TOL = 1e-8


@dataclass(frozen=True)
class PropertyCase:
    name: str
    channel: ChannelSpec
    encoder: EncoderSpec
    T: int


def negative_control_generators(T: int, count: int = 20, seed: int = 0,
                                scale: float = NEGATIVE_CONTROL_SCALE) -> List[FeedbackGenerator]:
    """Fixed library of seeded random strictly lower triangular generators.

    Entries are N(0, scale^2 / (T+1)), which keeps I - Zinv G well conditioned.
    """
    rng = np.random.default_rng(np.random.SeedSequence([seed, T]))
    size = T + 1
    return [FeedbackGenerator.from_matrix(
                strictly_lower(rng.standard_normal((size, size))) * scale / np.sqrt(size))
            for _ in range(count)]


def default_cases() -> List[PropertyCase]:
    arma1 = validate_channel([0.5], [0.3])
    arma2 = validate_channel([0.2, 0.1], [0.1, 0.05])
    return [
        PropertyCase("awgn_scalar", awgn(), EncoderSpec.scalar(1.5, 1.0), 20),
        PropertyCase("arma1_scalar", arma1, EncoderSpec.scalar(1.4, 1.0), 20),
        PropertyCase("arma1_vector", arma1,
                     EncoderSpec.from_matrices([[1.2, 0.3], [0.0, 0.6]], [1.0, 0.0]), 20),
        PropertyCase("arma2_scalar", arma2, EncoderSpec.scalar(1.3, 1.0), 20),
    ]


def _entry(value: float, tolerance: float, passed: Optional[bool] = None) -> dict:
    return {"value": float(value), "tolerance": tolerance,
            "passed": bool(value <= tolerance) if passed is None else bool(passed)}


def run_case(case: PropertyCase, tolerance: float = 1e-9, controls: int = 20,
             seed: int = 0) -> dict:
    """Every check for one case; negative controls are reported, never asserted."""
    ctx = ContextualLogger(logger, {"case": case.name, "T": case.T})
    T, channel, encoder = case.T, case.channel, case.encoder
    optimal = optimal_feedback_generator(encoder, channel, T)
    ledger = covariance_engine(encoder, optimal, channel, T)
    checks: Dict[str, dict] = {
        "orthogonality": _entry(check_orthogonality(ledger), tolerance),
        "ma_banded": _entry(check_ma_banded(ledger, channel.m), tolerance),
        "innovation_variances": _entry(
            float(np.max(np.abs(ledger.K_e - optimal.kf_form.Ke) / optimal.kf_form.Ke)),
            tolerance),
    }

    dim = encoder.dim + T + 1
    coding = closed_loop_system("coding", encoder, channel, T)
    checks["t_equivalence_control"] = _entry(check_t_equivalence(
        coding, closed_loop_system("control", encoder, channel, T, ("u", "e")), T, dim),
        EQUIVALENCE_TOL)
    checks["t_equivalence_estimation"] = _entry(check_t_equivalence(
        coding, closed_loop_system("estimation", encoder, channel, T), T, dim), EQUIVALENCE_TOL)

    generators = negative_control_generators(T, controls, seed)
    sums, complementary, delta_rates, delta_powers = [], [], [], []
    control_orth, control_band = [], []
    for gen in generators:
        sums.append(abs(sensitivity_sum_check(gen, channel, T)))
        complementary.append(complementary_sensitivity_check(gen, channel, T))
        d_rate, d_power = check_predictor_reduction(LinearPolicy.from_encoder(encoder, gen.G_T),
                                                    channel, T)
        delta_rates.append(d_rate)
        delta_powers.append(d_power)
        control = covariance_engine(encoder, gen, channel, T)
        control_orth.append(check_orthogonality(control))
        control_band.append(check_ma_banded(control, channel.m))
    checks["sensitivity_sum"] = _entry(max(sums), 1e-8)
    checks["complementary_sensitivity"] = _entry(max(complementary), 1e-8)
    checks["precode_rate"] = _entry(max(delta_rates), tolerance)
    checks["precode_power"] = _entry(-min(delta_powers), POWER_TOL)

    steady: Dict[str, float] = {}
    try:
        steady = check_steady_structure(encoder, channel)
        checks["steady_radius"] = _entry(steady["closed_loop_radius"], 1.0,
                                         passed=steady["closed_loop_radius"] < 1.0)
        checks["steady_rank"] = _entry(abs(steady["sigma_rank"] - steady["unstable_count"]), 0.0)
        checks["steady_allpass"] = _entry(steady["allpass_flatness"], STEADY_TOL)
        checks["steady_ke"] = _entry(steady["ke_relative_error"], KE_TOL)
    except AssumptionA2Violated as e:
        ctx.info(f"Steady checks skipped: {e}")

    passed = all(c["passed"] for c in checks.values())
    ctx.info(f"{'passed' if passed else 'FAILED'} ({len(checks)} checks)")
    return {
        "case": case.name,
        "T": T,
        "m": channel.m,
        "n": encoder.n,
        "passed": passed,
        "checks": checks,
        "negative_controls": {
            "orthogonality_max": float(max(control_orth)),
            "orthogonality_min": float(min(control_orth)),
            "ma_banded_max": float(max(control_band)),
        },
    }


def run_property_suite(cases: Optional[Sequence[PropertyCase]] = None, tolerance: float = 1e-9,
                       max_workers: int = 4, controls: int = 20, seed: int = 0) -> dict:
    """Run every case on a thread pool and aggregate in case order."""
    cases = list(cases) if cases is not None else default_cases()
    results: Dict[int, dict] = {}
    with TimedOperation(logger, f"Property suite ({len(cases)} cases)"):
        with ThreadPoolExecutor(max_workers=max_workers) as executor:
            futures = {executor.submit(run_case, case, tolerance, controls, seed): i
                       for i, case in enumerate(cases)}
            for future in as_completed(futures):
                results[futures[future]] = future.result()
    ordered = [results[i] for i in range(len(cases))]
    summary = {
        "passed": all(r["passed"] for r in ordered),
        "tolerance": tolerance,
        "cases": ordered,
    }
    if not summary["passed"]:
        failed = [f"{r['case']}.{name}" for r in ordered
                  for name, c in r["checks"].items() if not c["passed"]]
        logger.warning(f"Property checks failed: {', '.join(failed)}")
    return summary
