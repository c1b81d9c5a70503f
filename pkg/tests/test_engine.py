import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal
from scipy import stats

from services.intrinsic_audit import (
    AdversaryPolicy,
    IntrinsicAuditEngine,
    Verdict,
    run_training,
)
from services.intrinsic_audit.components import inject_proof, local_update

from tests.conftest import tiny_config


def _records_as_tuples(result):
    return [
        (r.round, r.verifier_id, tuple(sorted(r.omitted_ids)), r.asr, r.verdict, r.clean_accuracy)
        for r in result.records
    ]


def test_round_applies_the_mean_of_all_uploads(cfg):
    engine = IntrinsicAuditEngine(cfg)
    new_params, record = engine.run_round(engine.initial_params, 0)

    reference = IntrinsicAuditEngine(cfg)
    start = reference.initial_params
    uploads = []
    for client in reference.clients:
        grad = local_update(client, start, cfg, 0)
        if client.id == record.verifier_id:
            grad = inject_proof(client, start, grad, cfg, 0)
        uploads.append(grad.values)

    assert_allclose(new_params.values, start.values - cfg.lr * np.mean(uploads, axis=0), atol=1e-10)
    assert record.injected
    assert record.verdict in (Verdict.ACCEPT, Verdict.REJECT)


def test_runs_are_reproducible(cfg):
    a = run_training(cfg)
    b = run_training(cfg)
    assert _records_as_tuples(a) == _records_as_tuples(b)
    assert_array_equal(a.final_params.values, b.final_params.values)


def test_thread_pool_does_not_change_results(cfg):
    serial = run_training(cfg)
    pooled = run_training(cfg.model_copy(update={"workers": 3}))
    assert _records_as_tuples(serial) == _records_as_tuples(pooled)
    assert_array_equal(serial.final_params.values, pooled.final_params.values)


def test_every_client_verifies_once_per_cycle(cfg):
    result = run_training(cfg)
    first_cycle = [r.verifier_id for r in result.records[: cfg.n_clients]]
    assert sorted(first_cycle) == list(range(cfg.n_clients))


def test_honest_run_never_omits(cfg):
    result = run_training(cfg)
    assert all(not r.omitted_ids and not r.attacked for r in result.records)
    assert len(result.finetuned_accuracy) == cfg.n_clients
    assert 0.0 <= result.final_global_accuracy <= 1.0


def test_forced_verifier_omission_drops_only_the_verifier(omit_all_cfg):
    seen = []

    def hook(round_idx, verifier_id, client_ids):
        seen.append(list(client_ids))
        return {verifier_id}

    engine = IntrinsicAuditEngine(omit_all_cfg, victim_hook=hook)
    start = engine.initial_params
    new_params, record = engine.run_round(start, 0)

    assert record.attacked
    assert record.omitted_ids == frozenset({record.verifier_id})
    assert record.verifier_hit
    assert seen == [list(range(omit_all_cfg.n_clients))]

    reference = IntrinsicAuditEngine(omit_all_cfg)
    survivors = [
        local_update(c, start, omit_all_cfg, 0).values
        for c in reference.clients
        if c.id != record.verifier_id
    ]
    assert_allclose(
        new_params.values, start.values - omit_all_cfg.lr * np.mean(survivors, axis=0), atol=1e-10
    )


def test_omitting_everyone_freezes_the_model(omit_all_cfg):
    engine = IntrinsicAuditEngine(omit_all_cfg, victim_hook=lambda t, v, ids: set(ids))
    new_params, record = engine.run_round(engine.initial_params, 0)
    assert_array_equal(new_params.values, engine.initial_params.values)
    assert record.omitted_ids == frozenset(range(omit_all_cfg.n_clients))


def test_hook_returning_none_falls_back_to_the_server_draw(omit_all_cfg):
    result = run_training(omit_all_cfg.model_copy(update={"total_rounds": 4}))
    hooked = IntrinsicAuditEngine(omit_all_cfg, victim_hook=lambda t, v, ids: None)
    params = hooked.initial_params
    for expected in result.records:
        params, record = hooked.run_round(params, expected.round)
        assert record.omitted_ids == expected.omitted_ids
        assert len(record.omitted_ids) == 1


def test_baseline_without_verification_skips_every_verdict():
    result = run_training(tiny_config(verification=False, total_rounds=3))
    assert all(r.verdict == Verdict.SKIPPED and not r.injected for r in result.records)
    assert not result.any_reject


def test_injection_rounds_limit_the_proofs():
    result = run_training(tiny_config(injection_rounds=(2,)))
    injected = [r.round for r in result.records if r.injected]
    assert injected == [2]
    assert all(r.verdict == Verdict.SKIPPED for r in result.records if r.round != 2)


def test_per_client_asr_logging(cfg):
    result = run_training(cfg)
    assert all(len(r.per_client_asr) == cfg.n_clients for r in result.records)
    for r in result.records:
        assert r.per_client_asr[r.verifier_id] == pytest.approx(r.asr)

    quiet = run_training(cfg.model_copy(update={"log_client_asr": False}))
    assert all(r.per_client_asr is None for r in quiet.records)


def test_dirichlet_federation_builds_nonempty_clients():
    data = tiny_config().data.model_copy(update={"partition": "dirichlet", "dirichlet_beta": 0.1})
    engine = IntrinsicAuditEngine(tiny_config(data=data))
    assert all(len(c.local_data) > 0 and len(c.trigger_set) > 0 for c in engine.clients)
    assert sum(len(c.local_data) for c in engine.clients) == data.train_count


def test_epsilon_controls_attacked_rounds():
    policy = AdversaryPolicy(kind="omit", rho=0.25, epsilon=0.0)
    result = run_training(tiny_config(policy=policy))
    assert not any(r.attacked for r in result.records)

    policy = AdversaryPolicy(kind="omit", rho=0.25, attack_rounds=(1, 5))
    result = run_training(tiny_config(policy=policy))
    assert [r.round for r in result.records if r.attacked] == [1, 5]


def test_global_step_splits_into_clean_mean_and_scaled_proof(cfg):
    engine = IntrinsicAuditEngine(cfg)
    new_params, record = engine.run_round(engine.initial_params, 0)

    reference = IntrinsicAuditEngine(cfg)
    start = reference.initial_params
    clean = {c.id: local_update(c, start, cfg, 0) for c in reference.clients}
    verifier = reference.clients[record.verifier_id]
    boosted = inject_proof(verifier, start, clean[verifier.id], cfg, 0)
    backdoor_grad = (boosted.values - clean[verifier.id].values) / cfg.boost

    clean_step = cfg.lr * np.mean([g.values for g in clean.values()], axis=0)
    proof_step = (cfg.lr * cfg.boost / cfg.n_clients) * backdoor_grad
    assert_allclose(new_params.values, start.values - clean_step - proof_step, atol=1e-10)


def test_victims_that_avoid_the_verifier_never_hit_it(omit_all_cfg):
    n = omit_all_cfg.n_clients
    result = run_training(
        omit_all_cfg, victim_hook=lambda t, verifier, ids: {(verifier + 1) % n}
    )
    assert all(r.attacked for r in result.records)
    assert not any(r.verifier_hit for r in result.records)
    assert all(r.omitted_ids == frozenset({(r.verifier_id + 1) % n}) for r in result.records)


@pytest.mark.slow
def test_half_omitted_federations_hit_the_verifier_at_the_law_rate():
    policy = AdversaryPolicy(kind="omit", rho=0.5, epsilon=1.0)
    runs = 200
    hits = rejects = 0
    for seed in range(runs):
        cfg = tiny_config(
            seed=seed, total_rounds=10, finetune_epochs=0, log_client_asr=False, policy=policy
        )
        result = run_training(cfg)
        hits += any(r.verifier_hit for r in result.records)
        rejects += result.any_reject
    expected = 1 - 0.5**10
    sigma = np.sqrt(expected * (1 - expected) / runs)
    assert stats.binomtest(hits, runs, expected).pvalue > 1e-3
    assert abs(hits / runs - expected) <= 3 * sigma + 1 / runs
    # honest-round false alarms can only add rejects
    assert rejects / runs >= expected - 3 * sigma - 1 / runs
