import json
import logging
import time
from dataclasses import asdict, dataclass
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import pandas as pd

try:
    # Try relative imports first (when run as module)
    from .intrinsic_audit import IntrinsicAuditEngine, ProtocolConfig, config_from_flat
    from .intrinsic_audit.analysis import (
        MetricLog,
        analytic_detection_prob,
        effective_rho,
        monte_carlo_detection,
        render_report,
        summarize,
    )
    from .intrinsic_audit.components import RoundRecord
    from .intrinsic_audit.config import CSV_SCHEMAS, NUMERIC_CONFIG
    from .intrinsic_audit.core import TrainingResult, VictimHook
except ImportError:
    # Fallback to direct imports (when run as script)
    from intrinsic_audit import IntrinsicAuditEngine, ProtocolConfig, config_from_flat
    from intrinsic_audit.analysis import (
        MetricLog,
        analytic_detection_prob,
        effective_rho,
        monte_carlo_detection,
        render_report,
        summarize,
    )
    from intrinsic_audit.components import RoundRecord
    from intrinsic_audit.config import CSV_SCHEMAS, NUMERIC_CONFIG
    from intrinsic_audit.core import TrainingResult, VictimHook

logger = logging.getLogger(__name__)

FLOAT_FORMAT = NUMERIC_CONFIG["csv_float_format"]


@dataclass(frozen=True)
class RunManifest:
    """What produced a run directory"""

    config: Dict[str, str]
    config_hash: str
    seeds: Dict[str, int]
    outputs: Dict[str, str]
    created: str
    duration_seconds: float

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def rounds_frame(records: Sequence[RoundRecord]) -> pd.DataFrame:
    """rounds.csv layout"""
    return pd.DataFrame(
        [
            {
                "round": r.round,
                "verifier_id": r.verifier_id,
                "asr": r.asr,
                "verdict": r.verdict.value,
                "clean_acc": r.clean_accuracy,
                "omitted_ids": ";".join(str(i) for i in sorted(r.omitted_ids)),
            }
            for r in records
        ],
        columns=CSV_SCHEMAS["rounds"],
    )


def asr_matrix_frame(log: MetricLog) -> Optional[pd.DataFrame]:
    """asr_matrix.csv layout: one row per client, one column per round"""
    if log.asr_matrix is None:
        return None
    frame = pd.DataFrame(
        log.asr_matrix.values,
        columns=[r.round for r in log.rounds],
    )
    frame.index.name = "client"
    return frame


def summary_frame(summary: Dict[str, Any]) -> pd.DataFrame:
    return pd.DataFrame(
        [{"metric": k, "value": "" if v is None else v} for k, v in summary.items()],
        columns=CSV_SCHEMAS["summary"],
    )


class AuditAgent:
    """
    Main Audit Agent that runs experiments and writes their artifacts.

    Every CSV it emits is a pure function of the configuration:
    - rounds.csv, asr_matrix.csv and summary.csv per run
    - sweep.csv for parameter sweeps
    """

    def __init__(self, victim_hook: Optional[VictimHook] = None):
        """Initialize the agent; the hook is forwarded to every engine (tests only)"""
        self.victim_hook = victim_hook

    def run_experiment(
        self, cfg: ProtocolConfig, out_dir: Union[str, Path]
    ) -> Dict[str, Any]:
        """
        Run one simulation and write its artifacts.

        Args:
            cfg: validated configuration
            out_dir: directory receiving the artifacts (created if missing)

        Returns:
            Dict with the summary, the training result and the written paths
        """
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        logger.info(f"🔍 Running experiment {cfg.content_hash()[:12]} -> {out_dir}")
        start = time.time()

        result: TrainingResult = IntrinsicAuditEngine(
            cfg, victim_hook=self.victim_hook
        ).run_training()
        log = MetricLog.from_records(result.records)
        summary = summarize(log, cfg, result.finetuned_accuracy)
        summary["final_global_accuracy"] = result.final_global_accuracy

        paths = {
            "rounds": out_dir / "rounds.csv",
            "asr_matrix": out_dir / "asr_matrix.csv",
            "summary": out_dir / "summary.csv",
            "manifest": out_dir / "manifest.json",
            "report": out_dir / "report.txt",
        }
        rounds_frame(result.records).to_csv(
            paths["rounds"], index=False, float_format=FLOAT_FORMAT
        )
        matrix = asr_matrix_frame(log)
        if matrix is not None:
            matrix.to_csv(paths["asr_matrix"], float_format=FLOAT_FORMAT)
        else:
            paths.pop("asr_matrix")
        summary_frame(summary).to_csv(paths["summary"], index=False)

        try:
            paths["report"].write_text(render_report(summary, result.records), encoding="utf-8")
        except Exception as e:
            logger.error(f"❌ Error saving report: {e}")
            paths.pop("report")

        duration = time.time() - start
        manifest = self._write_manifest(cfg, paths, duration)
        logger.info(f"✅ Experiment completed in {duration:.2f} seconds")

        return {
            "summary": summary,
            "result": result,
            "paths": paths,
            "manifest": manifest,
            "any_reject": result.any_reject,
        }

    def _write_manifest(
        self, cfg: ProtocolConfig, paths: Dict[str, Path], duration: float
    ) -> RunManifest:
        manifest = RunManifest(
            config=cfg.to_flat(),
            config_hash=cfg.content_hash(),
            seeds={"base": cfg.seed},
            outputs={name: str(path) for name, path in paths.items()},
            created=datetime.now().isoformat(),
            duration_seconds=round(duration, 3),
        )
        try:
            paths["manifest"].write_text(manifest.to_json(), encoding="utf-8")
        except OSError as e:
            logger.error(f"❌ Error saving manifest: {e}")
        return manifest

    def run_sweep(
        self,
        cfg: ProtocolConfig,
        param: str,
        values: Sequence[str],
        out_dir: Union[str, Path],
    ) -> pd.DataFrame:
        """
        One sub-run per value of ``param`` (a flat config key).

        Returns:
            The sweep table, also written to ``out_dir/sweep.csv``
        """
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        total = len(values)

        logger.info(f"🚀 PARAMETER SWEEP: {param} over {total} values")
        logger.info("=" * 70)

        rows: List[Dict[str, Any]] = []
        for i, value in enumerate(values, 1):
            logger.info(f"📍 SWEEP {i}/{total}: {param} = {value}")
            flat = cfg.to_flat()
            flat[param] = str(value)
            sub_cfg = config_from_flat(flat)
            outcome = self.run_experiment(sub_cfg, out_dir / f"{param}={value}")
            summary = outcome["summary"]
            rows.append(
                {
                    "value": value,
                    "attacked_rounds": summary["attacked_rounds"],
                    "detected_rounds": summary["detected_rounds"],
                    "honest_accept_rate": summary["honest_accept_rate"],
                    "final_finetuned_accuracy": summary["final_finetuned_accuracy"],
                    "any_reject": outcome["any_reject"],
                }
            )

        frame = pd.DataFrame(rows, columns=CSV_SCHEMAS["sweep"])
        frame.to_csv(out_dir / "sweep.csv", index=False, float_format=FLOAT_FORMAT)
        logger.info(f"📄 Sweep table saved to: {out_dir / 'sweep.csv'}")
        return frame

    def detection_table(
        self,
        rho: float,
        k: int,
        trials: Optional[int] = None,
        n_clients: int = 10,
        seed: int = 0,
    ) -> pd.DataFrame:
        """Analytic detection probability, plus a Monte Carlo estimate when ``trials`` is set"""
        if trials:
            report = monte_carlo_detection(rho, k, n_clients, trials, seed)
            row = report.as_row()
        else:
            row = {
                "rho": rho,
                "k": k,
                "analytic_prob": analytic_detection_prob(rho, k),
                "effective_analytic_prob": analytic_detection_prob(
                    effective_rho(rho, n_clients), k
                ),
            }
        return pd.DataFrame([row], columns=CSV_SCHEMAS["detect_prob"])
