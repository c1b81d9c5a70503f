import io
import json

import pandas as pd
import pytest

from services import cli
from services.audit_agent import AuditAgent
from services.intrinsic_audit import AdversaryPolicy, load_config

from tests.conftest import TINY_DATA, tiny_config

ARTIFACTS = ("rounds.csv", "asr_matrix.csv", "summary.csv")


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "tiny.env"
    flat = tiny_config(total_rounds=4).to_flat()
    path.write_text("".join(f"{key} = {value}\n" for key, value in flat.items()))
    return path


def test_config_file_matches_the_fixture(config_file):
    assert load_config(config_file) == tiny_config(total_rounds=4)


def test_run_writes_artifacts(tmp_path, config_file):
    out = tmp_path / "out"
    code = cli.main(["run", "--config", str(config_file), "--out", str(out)])

    rounds = pd.read_csv(out / "rounds.csv")
    assert list(rounds.columns) == ["round", "verifier_id", "asr", "verdict", "clean_acc", "omitted_ids"]
    assert len(rounds) == 4
    assert code == (2 if (rounds["verdict"] == "reject").any() else 0)

    matrix = pd.read_csv(out / "asr_matrix.csv", index_col="client")
    assert matrix.shape == (4, 4)
    assert list(matrix.columns) == ["0", "1", "2", "3"]

    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config_hash"] == load_config(config_file).content_hash()
    assert set(manifest["outputs"]) >= {"rounds", "asr_matrix", "summary", "manifest"}
    assert (out / "report.txt").read_text(encoding="utf-8").startswith("🎯")


def test_same_config_gives_byte_identical_csvs(tmp_path, config_file):
    for name in ("a", "b"):
        cli.main(["run", "--config", str(config_file), "--out", str(tmp_path / name)])
    for artifact in ARTIFACTS:
        assert (tmp_path / "a" / artifact).read_bytes() == (tmp_path / "b" / artifact).read_bytes()


def test_seed_flag_overrides_the_file(tmp_path, config_file):
    cli.main(["run", "--config", str(config_file), "--out", str(tmp_path / "s7"), "--seed", "7"])
    manifest = json.loads((tmp_path / "s7" / "manifest.json").read_text())
    assert manifest["seeds"]["base"] == 7
    assert manifest["config"]["seed"] == "7"


def test_agent_returns_the_written_manifest(tmp_path):
    cfg = tiny_config(total_rounds=4)
    outcome = AuditAgent().run_experiment(cfg, tmp_path)
    manifest = outcome["manifest"]
    assert (tmp_path / "manifest.json").read_text(encoding="utf-8") == manifest.to_json()
    assert manifest.config_hash == cfg.content_hash()
    assert manifest.duration_seconds >= 0


class _Rejecting(AuditAgent):
    def run_experiment(self, cfg, out_dir):
        return {"summary": {"rejected_rounds": 3}, "any_reject": True}


def test_rejection_maps_to_exit_code_two(tmp_path, config_file, monkeypatch):
    monkeypatch.setattr(cli, "AuditAgent", _Rejecting)
    assert cli.main(["run", "--config", str(config_file), "--out", str(tmp_path)]) == 2


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["run"],
        ["run", "--config", "x.env"],
        ["detect-prob", "0.1"],
        ["detect-prob", "abc", "3"],
        ["launch"],
    ],
)
def test_usage_errors_exit_with_one(argv):
    assert cli.main(argv) == 1


def test_config_errors_exit_with_one(tmp_path):
    bad = tmp_path / "bad.env"
    bad.write_text("colour = blue\n")
    assert cli.main(["run", "--config", str(bad), "--out", str(tmp_path / "o")]) == 1
    assert cli.main(["run", "--config", str(tmp_path / "missing.env"), "--out", str(tmp_path)]) == 1


def test_detect_prob_prints_csv(capsys):
    assert cli.main(["detect-prob", "0.1", "100"]) == 0
    table = pd.read_csv(io.StringIO(capsys.readouterr().out))
    assert table.loc[0, "analytic_prob"] >= 0.9999
    assert table["monte_carlo_prob"].isna().all()
    assert table.loc[0, "effective_analytic_prob"] == pytest.approx(table.loc[0, "analytic_prob"])


def test_detect_prob_with_monte_carlo(capsys):
    assert cli.main(["detect-prob", "0.2", "5", "--trials", "4000", "--n", "10", "--seed", "1"]) == 0
    row = pd.read_csv(io.StringIO(capsys.readouterr().out)).iloc[0]
    assert row["trials"] == 4000
    assert abs(row["monte_carlo_prob"] - row["analytic_prob"]) < 5 * row["std_error"]


def test_detect_prob_rejects_bad_rho():
    assert cli.main(["detect-prob", "1.5", "3"]) == 1


def test_sweep(tmp_path, config_file):
    out = tmp_path / "sweep"
    code = cli.main(
        ["sweep", "--config", str(config_file), "--param", "boost", "--values", "1,8", "--out", str(out)]
    )
    table = pd.read_csv(out / "sweep.csv")
    assert list(table["value"]) == [1, 8]
    assert (out / "boost=1" / "rounds.csv").is_file()
    assert (out / "boost=8" / "summary.csv").is_file()
    assert code == (2 if table["any_reject"].any() else 0)


def test_sweep_rejects_unknown_parameter(tmp_path, config_file):
    code = cli.main(
        ["sweep", "--config", str(config_file), "--param", "colour", "--values", "1", "--out", str(tmp_path)]
    )
    assert code == 1


def test_detect_prob_reports_the_law_at_the_rounded_up_victim_count(capsys):
    assert cli.main(["detect-prob", "0.15", "5", "--trials", "100000", "--n", "10"]) == 0
    row = pd.read_csv(io.StringIO(capsys.readouterr().out)).iloc[0]
    assert row["analytic_prob"] == pytest.approx(1 - 0.85**5)
    assert row["effective_analytic_prob"] == pytest.approx(1 - 0.8**5)
    assert abs(row["monte_carlo_prob"] - row["effective_analytic_prob"]) < 4 * row["std_error"]


@pytest.mark.slow
def test_long_run_under_ten_percent_omission_exits_with_detection(tmp_path):
    policy = AdversaryPolicy(kind="omit", rho=0.1, epsilon=1.0)
    data = TINY_DATA.model_copy(update={"train_count": 600})
    codes = []
    for seed in range(20):
        cfg = tiny_config(
            seed=seed,
            n_clients=10,
            total_rounds=100,
            boost=10.0,
            finetune_epochs=0,
            log_client_asr=False,
            data=data,
            policy=policy,
        )
        path = tmp_path / f"seed{seed}.env"
        path.write_text("".join(f"{key} = {value}\n" for key, value in cfg.to_flat().items()))
        codes.append(cli.main(["run", "--config", str(path), "--out", str(tmp_path / f"out{seed}")]))
    assert codes == [2] * len(codes)
