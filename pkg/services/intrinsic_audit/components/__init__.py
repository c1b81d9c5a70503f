"""
Protocol Participants
Scheduling, client-side proof handling and the untrusted aggregation server.
"""

from .client import (
    ClientState,
    attack_success_rate,
    final_finetune,
    inject_proof,
    local_update,
    local_update_with_state,
    train_proof,
    verify_proof,
)
from .records import RoundRecord, Verdict
from .scheduling import SchedulingToken, assign_tokens, is_verifier, verifier_for_round
from .server import AggregationServer, aggregate, apply_global_update

__all__ = [
    "AggregationServer",
    "ClientState",
    "RoundRecord",
    "SchedulingToken",
    "Verdict",
    "aggregate",
    "apply_global_update",
    "assign_tokens",
    "attack_success_rate",
    "final_finetune",
    "inject_proof",
    "is_verifier",
    "local_update",
    "local_update_with_state",
    "train_proof",
    "verifier_for_round",
    "verify_proof",
]
