import numpy as np
import pytest
from numpy.testing import assert_array_equal

from services.intrinsic_audit.analysis import (
    MetricLog,
    asr_matrix,
    generate_notes,
    render_report,
    rounds_to_forget,
    spatial_interference_rate,
    summarize,
)
from services.intrinsic_audit.components import RoundRecord, Verdict
from services.intrinsic_audit.errors import AuditError

from tests.conftest import tiny_config

A, R = Verdict.ACCEPT, Verdict.REJECT

# (verifier, per-client ASR, verdict, attacked, omitted)
SCRIPT = [
    (0, (0.9, 0.1), A, False, ()),
    (1, (0.5, 0.8), A, False, ()),
    (0, (0.9, 0.75), A, False, ()),
    (1, (0.2, 0.3), R, True, (1,)),
    (0, (0.4, 0.1), R, False, ()),
    (1, (0.1, 0.9), A, True, (0,)),
]


@pytest.fixture
def records():
    return [
        RoundRecord(
            round=t,
            verifier_id=v,
            omitted_ids=frozenset(omitted),
            asr=row[v],
            verdict=verdict,
            clean_accuracy=0.5 + 0.05 * t,
            per_client_asr=row,
            attacked=attacked,
        )
        for t, (v, row, verdict, attacked, omitted) in enumerate(SCRIPT)
    ]


@pytest.fixture
def log(records):
    return MetricLog.from_records(records)


@pytest.fixture
def two_client_cfg():
    return tiny_config(n_clients=2)


def test_asr_matrix_is_client_by_round(log):
    matrix = log.asr_matrix
    assert matrix.shape == (2, 6)
    assert_array_equal(matrix.values[:, 1], [0.5, 0.8])
    assert_array_equal(np.flatnonzero(matrix.verifier_mask[0]), [0, 2, 4])
    assert matrix.omitted_mask[1, 3] and matrix.omitted_mask[0, 5]
    assert matrix.omitted_mask.sum() == 2


def test_asr_matrix_requires_complete_rows(records):
    with pytest.raises(AuditError):
        asr_matrix(MetricLog([]))
    ragged = [records[0], RoundRecord(1, 1, frozenset(), 0.1, A, 0.5, per_client_asr=(0.1,))]
    with pytest.raises(AuditError):
        asr_matrix(MetricLog(ragged))
    assert MetricLog.from_records([RoundRecord(0, 0, frozenset(), 0.1, A, 0.5)]).asr_matrix is None


def test_rounds_to_forget_within_one_cycle(log):
    assert rounds_to_forget(log, gamma=0.7, horizon=2) == [
        (0, 0, 1),
        (1, 1, 2),
        (0, 2, 1),
        (1, 3, 1),
    ]


def test_rounds_to_forget_reports_sticky_proofs(log):
    lags = rounds_to_forget(log, gamma=0.05, horizon=2)
    assert all(lag is None for _, _, lag in lags)


def test_spatial_interference_rate(log):
    assert spatial_interference_rate(log, gamma=0.7, warmup=0) == pytest.approx(1 / 6)
    assert spatial_interference_rate(log, gamma=0.7, warmup=3) == 0.0


def test_summarize_counts(log, two_client_cfg):
    summary = summarize(log, two_client_cfg, finetuned_accuracy={0: 0.5, 1: 0.7})
    assert summary["total_rounds"] == 6
    assert summary["attacked_rounds"] == 2
    assert summary["detected_rounds"] == 1
    assert summary["missed_rounds"] == 0
    assert summary["evaded_rounds"] == 1
    assert summary["rejected_rounds"] == 2
    assert summary["honest_inclusion_rounds"] == 5
    assert summary["honest_accept_rate"] == pytest.approx(0.8)
    assert summary["false_alarm_rounds"] == 1
    assert summary["false_alarm_rate"] == pytest.approx(0.2)
    assert summary["final_clean_accuracy"] == pytest.approx(0.75)
    assert summary["final_finetuned_accuracy"] == pytest.approx(0.6)
    assert summary["forgotten_fraction"] == 1.0
    assert summary["mean_rounds_to_forget"] == pytest.approx(1.25)
    assert summary["max_rounds_to_forget"] == 2
    assert summary["spatial_interference_rate"] == pytest.approx(1 / 6)


def test_summarize_respects_warmup(log):
    summary = summarize(log, tiny_config(n_clients=2, warmup_rounds=3))
    # rounds 4 and 5 remain; round 3 had the verifier omitted
    assert summary["honest_inclusion_rounds"] == 2
    assert summary["honest_accept_rate"] == pytest.approx(0.5)
    assert summary["final_finetuned_accuracy"] is None


def test_summarize_without_client_rows(two_client_cfg):
    bare = MetricLog.from_records([RoundRecord(0, 0, frozenset(), 0.9, A, 0.4)])
    summary = summarize(bare, two_client_cfg)
    assert summary["forgotten_fraction"] is None
    assert summary["spatial_interference_rate"] is None


def test_notes_and_report(log, records, two_client_cfg):
    summary = summarize(log, two_client_cfg)
    notes = generate_notes(summary)
    assert any("DETECTED" in note for note in notes)
    assert any("False alarms" in note for note in notes)

    report = render_report(summary, records)
    assert "REJECTED ROUNDS" in report
    assert "round 3: verifier 1" in report
    assert "round 4: verifier 0" in report
