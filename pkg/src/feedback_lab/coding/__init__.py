"""Feedback coding: encoder, feedback generators, transmission and CP forms."""

from .cp import (
    CPParams,
    cp_from_structure,
    cp_optimal_form,
    cp_power,
    cp_rate_colored,
    cp_rate_isi,
    ridge_sequence,
    structure_from_cp,
)
from .encoder import EncoderSpec, embed_message, message_direction
from .generator import (
    FeedbackGenerator,
    kalman_predictor_matrix,
    one_step_predictor,
    optimal_feedback_generator,
    steady_feedback_realization,
)
from .montecarlo import (
    MonteCarloRow,
    SchemeConfig,
    message_count,
    monte_carlo_error_rate,
    monte_carlo_power,
    montecarlo_to_csv,
)
from .precode import LinearPolicy, mmse_precode
from .transmission import (
    Transcript,
    control_system,
    decode_message,
    encode_message,
    estimation_system,
    sk_transmit,
    transcript_to_csv,
    transmit,
    transmit_linear,
)

__all__ = [
    "CPParams",
    "EncoderSpec",
    "FeedbackGenerator",
    "LinearPolicy",
    "MonteCarloRow",
    "SchemeConfig",
    "Transcript",
    "control_system",
    "cp_from_structure",
    "cp_optimal_form",
    "cp_power",
    "cp_rate_colored",
    "cp_rate_isi",
    "decode_message",
    "embed_message",
    "encode_message",
    "estimation_system",
    "kalman_predictor_matrix",
    "message_count",
    "message_direction",
    "mmse_precode",
    "monte_carlo_error_rate",
    "monte_carlo_power",
    "montecarlo_to_csv",
    "one_step_predictor",
    "optimal_feedback_generator",
    "ridge_sequence",
    "sk_transmit",
    "steady_feedback_realization",
    "structure_from_cp",
    "transcript_to_csv",
    "transmit",
    "transmit_linear",
]
