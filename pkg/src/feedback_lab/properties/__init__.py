"""Exact covariance propagation and structural property checks."""

from .covariance import CovarianceLedger, closed_loop_maps, covariance_engine, policy_ledger
from .checks import (
    check_ma_banded,
    check_orthogonality,
    check_predictor_reduction,
    check_steady_structure,
    check_t_equivalence,
    closed_loop_system,
)
from .suite import PropertyCase, default_cases, negative_control_generators, run_property_suite

__all__ = [
    "CovarianceLedger",
    "PropertyCase",
    "check_ma_banded",
    "check_orthogonality",
    "check_predictor_reduction",
    "check_steady_structure",
    "check_t_equivalence",
    "closed_loop_maps",
    "closed_loop_system",
    "covariance_engine",
    "default_cases",
    "negative_control_generators",
    "policy_ledger",
    "run_property_suite",
]
