"""
Run Metrics
Reshapes round logs into ASR heatmaps and condenses them into run summaries.
"""

from dataclasses import dataclass
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..components.records import RoundRecord, Verdict
from ..errors import AuditError
from ..schemas import ProtocolConfig


@dataclass(frozen=True, eq=False)
class AsrMatrix:
    """Client x round ASR values with verifier / omission flags"""

    values: np.ndarray
    verifier_mask: np.ndarray
    omitted_mask: np.ndarray

    @property
    def shape(self) -> Tuple[int, int]:
        return tuple(self.values.shape)


@dataclass
class MetricLog:
    rounds: List[RoundRecord]
    asr_matrix: Optional[AsrMatrix] = None

    @classmethod
    def from_records(cls, records: Sequence[RoundRecord]) -> "MetricLog":
        log = cls(list(records))
        if records and all(r.per_client_asr is not None for r in records):
            log.asr_matrix = asr_matrix(log)
        return log


def asr_matrix(log: MetricLog) -> AsrMatrix:
    """M[i][t] = ASR of client i's trigger set on the round-t global model"""
    if not log.rounds:
        raise AuditError("empty log")
    rows = [r.per_client_asr for r in log.rounds]
    if any(row is None for row in rows):
        raise AuditError("log is missing per-client ASR rows")
    widths = {len(row) for row in rows}
    if len(widths) != 1:
        raise AuditError(f"ragged per-client ASR rows: widths {sorted(widths)}")

    values = np.asarray(rows, dtype=np.float64).T
    n_clients, n_rounds = values.shape
    verifier_mask = np.zeros((n_clients, n_rounds), dtype=bool)
    omitted_mask = np.zeros((n_clients, n_rounds), dtype=bool)
    for t, record in enumerate(log.rounds):
        verifier_mask[record.verifier_id, t] = True
        for cid in record.omitted_ids:
            omitted_mask[cid, t] = True
    return AsrMatrix(values, verifier_mask, omitted_mask)


def rounds_to_forget(
    log: MetricLog, gamma: float, horizon: int
) -> List[Tuple[int, int, Optional[int]]]:
    """
    Forgetting lag of every injected proof.

    For each injection (client i, round t) with a full ``horizon`` of later
    rounds in the log, the lag is the first s - t (1 <= s - t <= horizon)
    with M[i][s] < gamma, or None if the proof outlived the horizon.
    """
    matrix = log.asr_matrix if log.asr_matrix is not None else asr_matrix(log)
    n_rounds = matrix.shape[1]
    lags = []
    for t, record in enumerate(log.rounds):
        if not record.injected or t + horizon >= n_rounds:
            continue
        row = matrix.values[record.verifier_id]
        lag = next(
            (s - t for s in range(t + 1, t + horizon + 1) if row[s] < gamma),
            None,
        )
        lags.append((record.verifier_id, t, lag))
    return lags


def spatial_interference_rate(log: MetricLog, gamma: float, warmup: int) -> float:
    """Share of non-verifier cells after warmup whose ASR reaches gamma"""
    matrix = log.asr_matrix if log.asr_matrix is not None else asr_matrix(log)
    cells = ~matrix.verifier_mask[:, warmup:]
    if not cells.any():
        return 0.0
    return float(np.mean(matrix.values[:, warmup:][cells] >= gamma))


def summarize(
    log: MetricLog,
    cfg: ProtocolConfig,
    finetuned_accuracy: Optional[Mapping[int, float]] = None,
) -> Dict[str, Any]:
    """
    Condense a run into detection, utility and ephemerality statistics.

    Args:
        log: round records of the run
        cfg: configuration the run used
        finetuned_accuracy: held-out accuracy of each client's fine-tuned model

    Returns:
        Flat summary dictionary
    """
    rounds = log.rounds
    warm = [r for r in rounds if r.round >= cfg.warmup_rounds]

    attacked = [r for r in rounds if r.attacked]
    detected = [r for r in attacked if r.verdict == Verdict.REJECT]
    missed = [
        r for r in attacked if r.verifier_hit and r.injected and r.verdict == Verdict.ACCEPT
    ]
    evaded = [r for r in attacked if not r.verifier_hit]
    honest_inclusion = [r for r in warm if r.injected and not r.verifier_hit]
    accepted = [r for r in honest_inclusion if r.verdict == Verdict.ACCEPT]
    false_alarms = [r for r in honest_inclusion if r.verdict == Verdict.REJECT]

    summary: Dict[str, Any] = {
        "total_rounds": len(rounds),
        "attacked_rounds": len(attacked),
        "detected_rounds": len(detected),
        "missed_rounds": len(missed),
        "evaded_rounds": len(evaded),
        "rejected_rounds": sum(r.verdict == Verdict.REJECT for r in rounds),
        "honest_inclusion_rounds": len(honest_inclusion),
        "honest_accept_rate": (
            len(accepted) / len(honest_inclusion) if honest_inclusion else None
        ),
        "false_alarm_rounds": len(false_alarms),
        "false_alarm_rate": (
            len(false_alarms) / len(honest_inclusion) if honest_inclusion else None
        ),
        "final_clean_accuracy": rounds[-1].clean_accuracy if rounds else None,
        "final_finetuned_accuracy": (
            float(np.mean(list(finetuned_accuracy.values()))) if finetuned_accuracy else None
        ),
        "mean_rounds_to_forget": None,
        "max_rounds_to_forget": None,
        "forgotten_fraction": None,
        "spatial_interference_rate": None,
    }

    if rounds and all(r.per_client_asr is not None for r in rounds):
        lags = rounds_to_forget(log, cfg.gamma, cfg.n_clients)
        known = [lag for _, _, lag in lags if lag is not None]
        if lags:
            summary["forgotten_fraction"] = len(known) / len(lags)
        if known:
            summary["mean_rounds_to_forget"] = float(np.mean(known))
            summary["max_rounds_to_forget"] = int(max(known))
        summary["spatial_interference_rate"] = spatial_interference_rate(
            log, cfg.gamma, cfg.warmup_rounds
        )

    return summary
