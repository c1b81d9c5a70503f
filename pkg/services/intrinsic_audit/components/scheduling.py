"""
Verifier Scheduling
Secret scheduling tokens and the round-robin self-election rule.
"""

from dataclasses import dataclass
from typing import List, Sequence

import numpy as np


@dataclass(frozen=True)
class SchedulingToken:
    """A client's secret slot in the verification schedule"""

    value: int


def assign_tokens(n: int, seed: int) -> List[SchedulingToken]:
    """
    Deal a uniformly random permutation of {0, ..., n-1} as tokens.

    Stands in for a one-time secure shuffle run by a trusted dealer.
    """
    if n < 1:
        raise ValueError(f"need at least one client, got n={n}")
    permutation = np.random.default_rng(seed).permutation(n)
    return [SchedulingToken(int(v)) for v in permutation]


def is_verifier(token: SchedulingToken, round_idx: int, n: int) -> bool:
    """True iff token = round (mod n)"""
    if round_idx < 0:
        raise ValueError(f"round must be non-negative, got {round_idx}")
    return token.value == round_idx % n


def verifier_for_round(tokens: Sequence[SchedulingToken], round_idx: int) -> int:
    """Index of the unique self-elected verifier"""
    n = len(tokens)
    matches = [i for i, token in enumerate(tokens) if is_verifier(token, round_idx, n)]
    if len(matches) != 1:
        raise ValueError(f"tokens are not a permutation: {len(matches)} verifiers in round {round_idx}")
    return matches[0]
