"""
Round Records
Per-round log entries written by the orchestrator and consumed by the analysis layer.
"""

from dataclasses import dataclass
from enum import Enum
from typing import FrozenSet, Optional, Tuple


class Verdict(str, Enum):
    ACCEPT = "accept"
    REJECT = "reject"
    SKIPPED = "skipped"


@dataclass(frozen=True)
class RoundRecord:
    """What happened in round ``round``"""

    round: int
    verifier_id: int
    omitted_ids: FrozenSet[int]
    asr: float
    verdict: Verdict
    clean_accuracy: float
    per_client_asr: Optional[Tuple[float, ...]] = None
    attacked: bool = False
    injected: bool = True

    @property
    def verifier_hit(self) -> bool:
        """The verifier's own update was omitted or rewritten"""
        return self.verifier_id in self.omitted_ids
