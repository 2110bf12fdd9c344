"""Fundamental limits: rate in its equivalent forms, power, Bode and estimation bounds."""

from .information import (
    EstimationBounds,
    allpass_flatness,
    average_power,
    bode_frequency_integral,
    bode_integral,
    complementary_sensitivity_check,
    directed_information,
    fim_crb_mmse,
    innovations_rate,
    mutual_information_toeplitz,
    sensitivity_sum_check,
)
from .report import (
    LimitsReport,
    convergence_rows,
    convergence_to_csv,
    finite_report,
    steady_report,
    to_bits,
    tradeoff_curve,
)
from .search import SearchResult, capacity_search

__all__ = [
    "EstimationBounds",
    "LimitsReport",
    "SearchResult",
    "allpass_flatness",
    "average_power",
    "bode_frequency_integral",
    "bode_integral",
    "capacity_search",
    "complementary_sensitivity_check",
    "convergence_rows",
    "convergence_to_csv",
    "directed_information",
    "fim_crb_mmse",
    "finite_report",
    "innovations_rate",
    "mutual_information_toeplitz",
    "sensitivity_sum_check",
    "steady_report",
    "to_bits",
    "tradeoff_curve",
]
