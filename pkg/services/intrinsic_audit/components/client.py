"""
Federated Client
Local training, intrinsic proof injection, proof verification and final fine-tuning.
"""

import logging
from dataclasses import dataclass, replace
from typing import Tuple

import numpy as np

from ..data import Dataset, TriggerCredential, TriggerSet
from ..errors import EmptyDataError
from ..nn import (
    Batch,
    GradVector,
    MomentumState,
    ParamVector,
    SGDRun,
    predict,
    run_sgd,
    train_epochs,
)
from ..schemas import ProtocolConfig
from ..utils.seeding import make_rng
from .records import Verdict
from .scheduling import SchedulingToken

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ClientState:
    """Everything a client keeps private"""

    id: int
    token: SchedulingToken
    local_data: Dataset
    credential: TriggerCredential
    trigger_set: TriggerSet
    momentum: MomentumState

    def with_momentum(self, momentum: MomentumState) -> "ClientState":
        return replace(self, momentum=momentum)


def local_update_with_state(
    client: ClientState, global_params: ParamVector, cfg: ProtocolConfig, round_idx: int = 0
) -> Tuple[GradVector, MomentumState]:
    """
    Effective gradient of ``local_epochs`` SGD passes over the client's data.

    Returns g such that global - lr * g is the client's trained local model,
    plus the client's updated momentum buffer. The buffer carries over from
    the previous round, so g is the plain loss gradient at the global model
    only for a single full-batch step taken with an empty buffer.
    """
    if len(client.local_data) == 0:
        raise EmptyDataError(f"client {client.id} has no local data")
    if cfg.lr == 0.0:
        return GradVector.zeros(len(global_params)), client.momentum

    run = run_sgd(
        global_params,
        client.local_data.as_batch(),
        cfg.lr,
        cfg.local_epochs,
        cfg.batch_size,
        client.momentum,
        make_rng(cfg.seed, "client", client.id, "round", round_idx),
    )
    return GradVector(run.displacement), run.state


def local_update(
    client: ClientState, global_params: ParamVector, cfg: ProtocolConfig, round_idx: int = 0
) -> GradVector:
    """The standard client upload g_i for this round"""
    grad, _ = local_update_with_state(client, global_params, cfg, round_idx)
    return grad


def _trigger_training_batch(
    client: ClientState, cfg: ProtocolConfig, rng: np.random.Generator
) -> Batch:
    """Trigger set plus ``trigger_clean_ratio`` clean local anchors per trigger example"""
    batch = client.trigger_set.as_batch()
    n_clean = min(
        int(np.floor(cfg.trigger_clean_ratio * len(client.trigger_set) + 0.5)),
        len(client.local_data),
    )
    if n_clean == 0:
        return batch
    anchors = np.sort(rng.choice(len(client.local_data), size=n_clean, replace=False))
    return batch.concat(client.local_data.subset(anchors).as_batch())


def train_proof(
    client: ClientState, proxy: ParamVector, cfg: ProtocolConfig, round_idx: int = 0
) -> SGDRun:
    """
    Trigger training from the proxy model with a fresh optimizer.

    Runs at most ``trigger_epochs`` passes at ``trigger_lr`` and stops after
    the first step at which the trained model's ASR on the client's trigger
    set reaches ``trigger_stop_asr``.
    """
    rng = make_rng(cfg.seed, "client", client.id, "trigger", round_idx)
    return run_sgd(
        proxy,
        _trigger_training_batch(client, cfg, rng),
        cfg.trigger_lr,
        cfg.trigger_epochs,
        cfg.batch_size,
        MomentumState.fresh(len(proxy), cfg.trigger_momentum),
        rng,
        stop_when=lambda params: attack_success_rate(params, client.trigger_set)
        >= cfg.trigger_stop_asr,
    )


def inject_proof(
    client: ClientState,
    global_params: ParamVector,
    clean_grad: GradVector,
    cfg: ProtocolConfig,
    round_idx: int = 0,
) -> GradVector:
    """
    Embed the verifier's intrinsic proof into its upload.

    1. proxy = global - lr * clean_grad (the verifier's guess at the next global model)
    2. train on the trigger set from the proxy at ``trigger_lr`` -> theta_bd
    3. g_bd = (proxy - theta_bd) / lr, upload clean_grad + boost * g_bd

    With boost = n_clients the aggregated model moves by exactly proxy - theta_bd
    on top of the clean mean step.
    """
    if len(client.trigger_set) == 0:
        raise EmptyDataError(f"client {client.id} has an empty trigger set")
    if cfg.boost == 0.0 or cfg.lr == 0.0:
        return clean_grad

    proxy = global_params.with_values(global_params.values - cfg.lr * clean_grad.values)
    run = train_proof(client, proxy, cfg, round_idx)
    logger.debug(f"🔏 Client {client.id} proof trained in {run.steps} steps")
    # proxy - theta_bd = trigger_lr * displacement
    backdoor_grad = (cfg.trigger_lr / cfg.lr) * run.displacement
    return GradVector(clean_grad.values + cfg.boost * backdoor_grad)


def attack_success_rate(params: ParamVector, trigger_set: TriggerSet) -> float:
    """Fraction of trigger examples classified as the credential's target"""
    if len(trigger_set) == 0:
        raise EmptyDataError("empty trigger set")
    predictions = predict(params, trigger_set.as_batch().inputs)
    return float(np.mean(predictions == trigger_set.target_label))


def verify_proof(
    client: ClientState, global_params: ParamVector, gamma: float
) -> Tuple[float, Verdict]:
    """ASR of the client's trigger set on the aggregated model and the resulting verdict"""
    asr = attack_success_rate(global_params, client.trigger_set)
    return asr, Verdict.ACCEPT if asr >= gamma else Verdict.REJECT


def final_finetune(
    client: ClientState, global_params: ParamVector, cfg: ProtocolConfig
) -> ParamVector:
    """Clean local training after the last round; the result is never uploaded"""
    if cfg.finetune_epochs == 0:
        return global_params
    params, _ = train_epochs(
        global_params,
        client.local_data.as_batch(),
        cfg.lr,
        cfg.finetune_epochs,
        cfg.batch_size,
        MomentumState.fresh(len(global_params), cfg.momentum),
        make_rng(cfg.seed, "finetune", client.id),
    )
    return params
