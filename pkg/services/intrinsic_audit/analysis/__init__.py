"""
Analysis Layer
Detection law, Monte Carlo validation and post-processing of round logs.
"""

from .detection import (
    DetectionReport,
    analytic_detection_prob,
    effective_rho,
    monte_carlo_detection,
    verifier_independence_test,
    victim_count,
)
from .metrics import (
    AsrMatrix,
    MetricLog,
    asr_matrix,
    rounds_to_forget,
    spatial_interference_rate,
    summarize,
)
from .reports import generate_notes, render_report

__all__ = [
    "AsrMatrix",
    "DetectionReport",
    "MetricLog",
    "analytic_detection_prob",
    "asr_matrix",
    "effective_rho",
    "generate_notes",
    "monte_carlo_detection",
    "render_report",
    "rounds_to_forget",
    "spatial_interference_rate",
    "summarize",
    "verifier_independence_test",
    "victim_count",
]
