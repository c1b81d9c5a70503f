"""
Core Audit Engine
Main orchestrator that runs the federated protocol round by round.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Set, Tuple

import numpy as np

from .components import (
    AggregationServer,
    ClientState,
    RoundRecord,
    Verdict,
    assign_tokens,
    attack_success_rate,
    final_finetune,
    inject_proof,
    local_update_with_state,
    verifier_for_round,
    verify_proof,
)
from .data import (
    Dataset,
    build_trigger_set,
    dirichlet_partition,
    gen_synthetic,
    iid_partition,
    sample_trigger_credential,
    train_test_split,
)
from .nn import Batch, GradVector, MomentumState, ParamVector, evaluate, init_params
from .schemas import ProtocolConfig
from .utils.seeding import derive_seed

logger = logging.getLogger(__name__)

# (round, verifier_id, client_ids) -> forced victims, or None for the server's own draw
VictimHook = Callable[[int, int, Sequence[int]], Optional[Set[int]]]


@dataclass
class TrainingResult:
    """Output of a full run"""

    records: List[RoundRecord]
    final_params: ParamVector
    finetuned_params: Dict[int, ParamVector] = field(default_factory=dict)
    finetuned_accuracy: Dict[int, float] = field(default_factory=dict)
    final_global_accuracy: float = 0.0

    @property
    def any_reject(self) -> bool:
        return any(r.verdict == Verdict.REJECT for r in self.records)


class IntrinsicAuditEngine:
    """
    Federated training with single-verifier intrinsic proofs.

    Builds the synthetic federation from the config (data, partitions,
    credentials, tokens, initial model), then runs ``total_rounds`` rounds and
    the final local fine-tuning.
    """

    def __init__(self, cfg: ProtocolConfig, victim_hook: Optional[VictimHook] = None):
        """Initialize the federation deterministically from ``cfg``"""
        self.cfg = cfg
        self.victim_hook = victim_hook
        self.server = AggregationServer(cfg.policy, derive_seed(cfg.seed, "server"), cfg.lr)

        self.train_data, self.test_data = self._build_datasets()
        self.test_batch: Batch = self.test_data.as_batch()
        self.clients: List[ClientState] = self._build_clients(self._partition(self.train_data))
        self.initial_params = init_params(cfg.model_spec, derive_seed(cfg.seed, "model"))

    def _build_datasets(self) -> Tuple[Dataset, Dataset]:
        data_cfg = self.cfg.data
        total = data_cfg.train_count + data_cfg.test_count
        full = gen_synthetic(
            data_cfg.num_classes,
            data_cfg.shape,
            total,
            derive_seed(self.cfg.seed, "data"),
            noise_std=data_cfg.noise_std,
        )
        return train_test_split(
            full, data_cfg.test_count / total, derive_seed(self.cfg.seed, "split")
        )

    def _partition(self, data: Dataset) -> List[Dataset]:
        seed = derive_seed(self.cfg.seed, "partition")
        if self.cfg.data.partition == "iid":
            return iid_partition(data, self.cfg.n_clients, seed)
        return dirichlet_partition(data, self.cfg.n_clients, self.cfg.data.dirichlet_beta, seed)

    def _build_clients(self, partitions: List[Dataset]) -> List[ClientState]:
        cfg = self.cfg
        tokens = assign_tokens(cfg.n_clients, derive_seed(cfg.seed, "tokens"))
        n_params = cfg.model_spec.num_params
        clients = []
        for i, local in enumerate(partitions):
            credential = sample_trigger_credential(
                cfg.data.shape, cfg.data.num_classes, derive_seed(cfg.seed, "client", i, "credential")
            )
            trigger_set = build_trigger_set(
                local,
                credential,
                cfg.data.trigger_fraction,
                derive_seed(cfg.seed, "client", i, "trigger"),
            )
            clients.append(
                ClientState(
                    id=i,
                    token=tokens[i],
                    local_data=local,
                    credential=credential,
                    trigger_set=trigger_set,
                    momentum=MomentumState.fresh(n_params, cfg.momentum),
                )
            )
        return clients

    def _client_round(
        self, client: ClientState, params: ParamVector, round_idx: int, inject: bool
    ) -> Tuple[GradVector, MomentumState]:
        grad, momentum = local_update_with_state(client, params, self.cfg, round_idx)
        if inject:
            grad = inject_proof(client, params, grad, self.cfg, round_idx)
        return grad, momentum

    def _collect_updates(
        self, params: ParamVector, round_idx: int, verifier_id: int, inject: bool
    ) -> Dict[int, GradVector]:
        """Run every client against the same snapshot; results are order-independent"""

        def work(client: ClientState) -> Tuple[GradVector, MomentumState]:
            return self._client_round(
                client, params, round_idx, inject and client.id == verifier_id
            )

        if self.cfg.workers > 1:
            with ThreadPoolExecutor(max_workers=self.cfg.workers) as pool:
                results = list(pool.map(work, self.clients))
        else:
            results = [work(client) for client in self.clients]

        self.clients = [c.with_momentum(m) for c, (_, m) in zip(self.clients, results)]
        return {c.id: grad for c, (grad, _) in zip(self.clients, results)}

    def run_round(self, params: ParamVector, round_idx: int) -> Tuple[ParamVector, RoundRecord]:
        """One round: local work, (optional) injection, aggregation, verification"""
        cfg = self.cfg
        tokens = [c.token for c in self.clients]
        verifier_id = self.clients[verifier_for_round(tokens, round_idx)].id
        inject = cfg.injects_in(round_idx)

        # the server receives only id -> vector
        updates = self._collect_updates(params, round_idx, verifier_id, inject)
        forced = None
        if self.victim_hook is not None:
            forced = self.victim_hook(round_idx, verifier_id, sorted(updates))
        new_params, omitted, attacked = self.server.step(params, updates, round_idx, forced)

        verifier = self.clients[verifier_id]
        if inject:
            asr, verdict = verify_proof(verifier, new_params, cfg.gamma)
        else:
            asr, verdict = attack_success_rate(new_params, verifier.trigger_set), Verdict.SKIPPED

        per_client = None
        if cfg.log_client_asr:
            try:
                per_client = tuple(
                    attack_success_rate(new_params, c.trigger_set) for c in self.clients
                )
            except Exception as e:
                logger.error(f"   ❌ per-client ASR logging failed in round {round_idx}: {e}")

        clean_accuracy, _ = evaluate(new_params, self.test_batch)
        record = RoundRecord(
            round=round_idx,
            verifier_id=verifier_id,
            omitted_ids=omitted,
            asr=asr,
            verdict=verdict,
            clean_accuracy=clean_accuracy,
            per_client_asr=per_client,
            attacked=attacked,
            injected=inject,
        )

        logger.debug(
            f"   🔁 round {round_idx}: verifier={verifier_id} asr={asr:.3f} "
            f"verdict={verdict.value} acc={clean_accuracy:.3f} omitted={sorted(omitted)}"
        )
        if verdict == Verdict.REJECT:
            logger.warning(
                f"   🚨 round {round_idx}: verifier {verifier_id} rejected the aggregate "
                f"(ASR {asr:.2f} < γ={cfg.gamma})"
            )
        return new_params, record

    def run_training(self) -> TrainingResult:
        """
        Execute all rounds followed by the local fine-tuning phase.

        Returns:
            TrainingResult with per-round records, the final global model and
            each client's fine-tuned model
        """
        cfg = self.cfg
        logger.info(
            f"🎯 Starting federated run: {cfg.n_clients} clients, {cfg.total_rounds} rounds, "
            f"policy={cfg.policy.kind}, verification={'on' if cfg.verification else 'off'}"
        )

        logger.info("📊 STEP 1: Running training rounds...")
        params = self.initial_params
        records: List[RoundRecord] = []
        for round_idx in range(cfg.total_rounds):
            params, record = self.run_round(params, round_idx)
            records.append(record)

        rejects = sum(r.verdict == Verdict.REJECT for r in records)
        final_accuracy, _ = evaluate(params, self.test_batch)
        logger.info(f"   📈 Global clean accuracy after training: {final_accuracy:.3f}")
        logger.info(f"   🔍 Rejected rounds: {rejects}/{len(records)}")

        logger.info("🧹 STEP 2: Final local fine-tuning (not uploaded)...")
        finetuned = {c.id: final_finetune(c, params, cfg) for c in self.clients}
        finetuned_accuracy = {
            cid: evaluate(p, self.test_batch)[0] for cid, p in finetuned.items()
        }
        logger.info(
            f"   📈 Mean fine-tuned accuracy: {np.mean(list(finetuned_accuracy.values())):.3f}"
        )

        logger.info("✅ Federated run complete")
        return TrainingResult(
            records=records,
            final_params=params,
            finetuned_params=finetuned,
            finetuned_accuracy=finetuned_accuracy,
            final_global_accuracy=final_accuracy,
        )


def run_training(
    cfg: ProtocolConfig, victim_hook: Optional[VictimHook] = None
) -> TrainingResult:
    """Build an engine for ``cfg`` and run it to completion"""
    return IntrinsicAuditEngine(cfg, victim_hook=victim_hook).run_training()
