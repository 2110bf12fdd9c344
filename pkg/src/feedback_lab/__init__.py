"""
Feedback Lab

Kalman-filter feedback coding over Gaussian channels with memory, with the
equivalent rate, power, estimation and control limits of the closed loop.
"""

__version__ = "0.1.0"
__author__ = "Feedback Lab"
__description__ = "Kalman-filter feedback coding and its fundamental limits"

from .config.settings import ExperimentConfig
from .errors import FeedbackLabError

__all__ = ["ExperimentConfig", "FeedbackLabError"]
