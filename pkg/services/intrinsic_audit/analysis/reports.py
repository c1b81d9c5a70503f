"""
Audit Reports
Turns a run summary into notes and a human-readable text report.
"""

from datetime import datetime
from typing import Any, Dict, List, Sequence

from ..components.records import RoundRecord, Verdict
from ..config import ACCEPTANCE_THRESHOLDS, VERDICT_DESCRIPTIONS


def generate_notes(summary: Dict[str, Any]) -> List[str]:
    """
    Actionable observations about a run.

    Args:
        summary: output of ``summarize``

    Returns:
        List of note strings (at most 10)
    """
    notes = []

    if summary.get("detected_rounds", 0) > 0:
        notes.append(
            f"🚨 DETECTED: {summary['detected_rounds']} attacked round(s) rejected by the verifier"
        )
    elif summary.get("attacked_rounds", 0) > 0:
        notes.append(
            "⚠️ UNDETECTED: the server misbehaved but never touched the active verifier"
        )
    elif summary.get("rejected_rounds", 0) == 0:
        notes.append("✅ CLEAN: every verified round was accepted")

    if summary.get("missed_rounds", 0) > 0:
        notes.append(
            f"🔍 Missed: {summary['missed_rounds']} round(s) dropped the verifier yet still passed"
        )

    accept_rate = summary.get("honest_accept_rate")
    if accept_rate is not None and accept_rate < ACCEPTANCE_THRESHOLDS["honest_accept_rate"]:
        notes.append(
            f"📉 Weak proofs: honest accept rate {accept_rate:.1%}; consider a larger boost or trigger_lr"
        )

    false_alarm_rate = summary.get("false_alarm_rate")
    if false_alarm_rate is not None and false_alarm_rate > ACCEPTANCE_THRESHOLDS["false_alarm_rate"]:
        notes.append(f"⏰ False alarms: {false_alarm_rate:.1%} of honest rounds rejected")

    forgotten = summary.get("forgotten_fraction")
    if forgotten is not None and forgotten < ACCEPTANCE_THRESHOLDS["forgotten_fraction"]:
        notes.append(
            f"🧠 Sticky proofs: only {forgotten:.1%} of injected triggers faded within one schedule cycle"
        )

    interference = summary.get("spatial_interference_rate")
    if (
        interference is not None
        and interference > ACCEPTANCE_THRESHOLDS["spatial_interference_rate"]
    ):
        notes.append(
            f"🎭 Interference: {interference:.1%} of non-verifier trigger cells reached the threshold"
        )

    return notes[:10]


def render_report(
    summary: Dict[str, Any], records: Sequence[RoundRecord], title: str = "INTRINSIC AUDIT REPORT"
) -> str:
    """Plain-text report of one run"""
    lines = []
    lines.append(f"🎯 {title}")
    lines.append("=" * 80)
    lines.append(f"Generated: {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}")
    lines.append(f"Rounds: {summary.get('total_rounds', len(records))}")
    lines.append("")

    lines.append("📊 EXECUTIVE SUMMARY")
    lines.append("-" * 40)
    for key in (
        "attacked_rounds",
        "detected_rounds",
        "missed_rounds",
        "evaded_rounds",
        "rejected_rounds",
        "honest_accept_rate",
        "false_alarm_rate",
        "final_clean_accuracy",
        "final_finetuned_accuracy",
        "mean_rounds_to_forget",
        "forgotten_fraction",
        "spatial_interference_rate",
    ):
        value = summary.get(key)
        shown = "n/a" if value is None else (f"{value:.4f}" if isinstance(value, float) else value)
        lines.append(f"  • {key.replace('_', ' ').title()}: {shown}")
    lines.append("")

    rejected = [r for r in records if r.verdict == Verdict.REJECT]
    lines.append("🔍 REJECTED ROUNDS")
    lines.append("-" * 40)
    if not rejected:
        lines.append(f"  none ({VERDICT_DESCRIPTIONS['accept'].lower()} in every audited round)")
    for record in rejected:
        lines.append(
            f"  round {record.round}: verifier {record.verifier_id}, ASR {record.asr:.3f}, "
            f"omitted {sorted(record.omitted_ids) or '-'}"
        )
    lines.append("")

    notes = generate_notes(summary)
    if notes:
        lines.append("📝 NOTES")
        lines.append("-" * 40)
        for note in notes:
            lines.append(f"  • {note}")

    return "\n".join(lines)
