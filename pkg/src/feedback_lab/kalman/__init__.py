"""Riccati engine shared by the coding, estimation and control views."""

from .riccati import AugmentedSystem, RiccatiTrajectory, riccati_run, riccati_step
from .smoother import (
    SmootherState,
    fixed_point_smoother_step,
    information_factors,
    information_path,
    inverse_power_step,
    message_response,
    mmse_path,
    mmse_W_inverse_power,
    mmse_W_update,
    smooth,
)
from .steady import (
    SteadyState,
    check_assumption_a2,
    riccati_steady_iterate,
    riccati_steady_transform,
    stable_antistable_split,
    sylvester_solve,
)

__all__ = [
    "AugmentedSystem",
    "RiccatiTrajectory",
    "SmootherState",
    "SteadyState",
    "check_assumption_a2",
    "fixed_point_smoother_step",
    "information_factors",
    "information_path",
    "inverse_power_step",
    "message_response",
    "mmse_path",
    "mmse_W_inverse_power",
    "mmse_W_update",
    "riccati_run",
    "riccati_steady_iterate",
    "riccati_steady_transform",
    "riccati_step",
    "smooth",
    "stable_antistable_split",
    "sylvester_solve",
]
