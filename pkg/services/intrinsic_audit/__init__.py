"""
Intrinsic Audit Simulator
Deterministic federated-learning simulator for backdoor-based verifiable aggregation.

This system provides:
- A from-scratch MLP engine with exact gradients
- Synthetic non-IID federations with private trigger credentials
- Single anonymous verifier per round with boosted proof injection
- Honest, omitting and tampering server policies
- Detection-law analysis, Monte Carlo checks and ASR heatmaps

Usage:
    from services.intrinsic_audit import ProtocolConfig, IntrinsicAuditEngine

    engine = IntrinsicAuditEngine(ProtocolConfig(n_clients=10, total_rounds=50))
    result = engine.run_training()
"""

from .analysis import (
    MetricLog,
    analytic_detection_prob,
    asr_matrix,
    monte_carlo_detection,
    summarize,
)
from .components import RoundRecord, Verdict
from .core import IntrinsicAuditEngine, TrainingResult, run_training
from .errors import AuditError, ConfigError
from .schemas import (
    AdversaryPolicy,
    DataConfig,
    ModelSpec,
    ProtocolConfig,
    config_from_flat,
    load_config,
)

__version__ = "1.0.0"

__all__ = [
    "AdversaryPolicy",
    "AuditError",
    "ConfigError",
    "DataConfig",
    "IntrinsicAuditEngine",
    "MetricLog",
    "ModelSpec",
    "ProtocolConfig",
    "RoundRecord",
    "TrainingResult",
    "Verdict",
    "analytic_detection_prob",
    "asr_matrix",
    "config_from_flat",
    "load_config",
    "monte_carlo_detection",
    "run_training",
    "summarize",
]
