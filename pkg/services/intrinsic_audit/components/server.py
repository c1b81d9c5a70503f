"""
Aggregation Server
Mean aggregation under an adversary policy. The server only ever sees client ids
and update vectors: no tokens, credentials or trigger sets cross this boundary.
"""

from typing import AbstractSet, FrozenSet, Mapping, Optional, Tuple

import numpy as np

from ..errors import EmptyDataError, ShapeMismatchError
from ..nn import GradVector, ParamVector
from ..schemas import AdversaryPolicy
from ..utils.seeding import derive_seed


def _mean(vectors: list) -> np.ndarray:
    return np.mean(np.stack(vectors), axis=0)


def _tamper(
    update: GradVector, policy: AdversaryPolicy, rng: np.random.Generator
) -> np.ndarray:
    if policy.tamper_mode == "zero":
        return np.zeros(len(update))
    if policy.tamper_mode == "noise":
        return rng.normal(0.0, policy.tamper_magnitude, size=len(update))
    return policy.tamper_magnitude * update.values


def aggregate(
    updates: Mapping[int, GradVector],
    policy: AdversaryPolicy,
    round_idx: int,
    rng_seed: int,
    victims: Optional[AbstractSet[int]] = None,
) -> Tuple[GradVector, FrozenSet[int]]:
    """
    Aggregate one round of uploads.

    Args:
        updates: client id -> uploaded update
        policy: server behaviour
        round_idx: current round
        rng_seed: seed for this round's attack and victim draws
        victims: forced victim set for attacked rounds (white-box test hook)

    Returns:
        Tuple of (aggregated update, ids omitted or tampered with)

    When every client is omitted the round yields a zero update and reports
    all ids as omitted.
    """
    if not updates:
        raise EmptyDataError("no updates to aggregate")
    ids = sorted(updates)
    lengths = {len(updates[i]) for i in ids}
    if len(lengths) != 1:
        raise ShapeMismatchError(f"update lengths differ: {sorted(lengths)}")
    length = lengths.pop()

    rng = np.random.default_rng(rng_seed)
    if not policy.is_attacked(round_idx, rng):
        return GradVector(_mean([updates[i].values for i in ids])), frozenset()

    if victims is None:
        count = min(policy.victim_count(len(ids)), len(ids))
        victims = rng.choice(ids, size=count, replace=False).tolist()
    victims = frozenset(int(v) for v in victims) & frozenset(ids)

    if policy.kind == "omit":
        survivors = [updates[i].values for i in ids if i not in victims]
        if not survivors:
            return GradVector.zeros(length), frozenset(ids)
        return GradVector(_mean(survivors)), victims

    rewritten = [
        _tamper(updates[i], policy, rng) if i in victims else updates[i].values for i in ids
    ]
    return GradVector(_mean(rewritten)), victims


def apply_global_update(params: ParamVector, agg: GradVector, lr: float) -> ParamVector:
    """theta - lr * agg"""
    if len(params) != len(agg):
        raise ShapeMismatchError(f"params={len(params)} but update={len(agg)}")
    return params.with_values(params.values - lr * agg.values)


class AggregationServer:
    """Untrusted server holding nothing but its policy and its randomness"""

    def __init__(self, policy: AdversaryPolicy, seed: int, lr: float):
        self.policy = policy
        self.seed = seed
        self.lr = lr

    def aggregate_round(
        self,
        updates: Mapping[int, GradVector],
        round_idx: int,
        victims: Optional[AbstractSet[int]] = None,
    ) -> Tuple[GradVector, FrozenSet[int]]:
        return aggregate(
            updates,
            self.policy,
            round_idx,
            derive_seed(self.seed, "server", round_idx),
            victims=victims,
        )

    def step(
        self,
        params: ParamVector,
        updates: Mapping[int, GradVector],
        round_idx: int,
        victims: Optional[AbstractSet[int]] = None,
    ) -> Tuple[ParamVector, FrozenSet[int], bool]:
        """Aggregate and apply; also reports whether the round was attacked"""
        attacked = self.policy.is_attacked(
            round_idx, np.random.default_rng(derive_seed(self.seed, "server", round_idx))
        )
        agg, omitted = self.aggregate_round(updates, round_idx, victims)
        return apply_global_update(params, agg, self.lr), omitted, attacked
