"""
Detection Probability
Closed-form detection law for random single-verifier audits and its Monte Carlo check.
"""

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from ..config import NUMERIC_CONFIG
from ..errors import AuditError


@dataclass(frozen=True)
class DetectionReport:
    rho: float
    k: int
    analytic_prob: float
    monte_carlo_prob: Optional[float] = None
    trials: Optional[int] = None
    std_error: Optional[float] = None
    # the law at ceil(rho*n)/n, which is what the simulation samples
    effective_prob: Optional[float] = None

    def as_row(self) -> dict:
        return {
            "rho": self.rho,
            "k": self.k,
            "analytic_prob": self.analytic_prob,
            "monte_carlo_prob": self.monte_carlo_prob,
            "trials": self.trials,
            "std_error": self.std_error,
            "effective_analytic_prob": self.effective_prob,
        }


def analytic_detection_prob(rho: float, k: int) -> float:
    """
    P_detect = 1 - (1 - rho)^k.

    Evaluated as -expm1(k * log1p(-rho)) so small rho keeps full precision.
    """
    if not 0.0 <= rho <= 1.0:
        raise AuditError(f"rho must lie in [0, 1], got {rho}")
    if k < 0:
        raise AuditError(f"k must be non-negative, got {k}")
    if k == 0:
        return 0.0
    if rho == 1.0:
        return 1.0
    return -math.expm1(k * math.log1p(-rho))


def victim_count(rho: float, n_clients: int) -> int:
    """ceil(rho * n), tolerant of float noise such as 0.1 * 30"""
    return int(math.ceil(rho * n_clients - 1e-12))


def effective_rho(rho: float, n_clients: int) -> float:
    """Per-round detection probability once the victim count is rounded up"""
    if n_clients < 1:
        raise AuditError(f"n_clients must be >= 1, got {n_clients}")
    return victim_count(rho, n_clients) / n_clients


def monte_carlo_detection(
    rho: float, k: int, n_clients: int, trials: int, seed: int
) -> DetectionReport:
    """
    Simulate the schedule/victim process directly.

    Each attacked round draws a uniform verifier and ceil(rho*n) uniform
    victims; a trial detects if the verifier is a victim in any of its k rounds.
    ``analytic_prob`` is the plain law for ``rho``; ``effective_prob`` uses
    ceil(rho*n)/n and is the value the estimate converges to.

    Trials run in chunks and rounds one at a time, so memory stays at
    ``NUMERIC_CONFIG["monte_carlo_elements"]`` random keys whatever k is.
    """
    if trials < 1:
        raise AuditError(f"trials must be >= 1, got {trials}")
    if n_clients < 1:
        raise AuditError(f"n_clients must be >= 1, got {n_clients}")
    m = victim_count(rho, n_clients)

    rng = np.random.default_rng(seed)
    detected = 0
    chunk = max(1, NUMERIC_CONFIG["monte_carlo_elements"] // n_clients)
    if k > 0 and m > 0:
        for start in range(0, trials, chunk):
            size = min(chunk, trials - start)
            hit = np.zeros(size, dtype=bool)
            for _ in range(k):
                # victims = the m clients with the smallest random keys
                keys = rng.random((size, n_clients))
                verifier = rng.integers(0, n_clients, size=size)
                verifier_key = keys[np.arange(size), verifier]
                hit |= (keys < verifier_key[:, None]).sum(axis=1) < m
            detected += int(hit.sum())

    p_hat = detected / trials
    return DetectionReport(
        rho=rho,
        k=k,
        analytic_prob=analytic_detection_prob(rho, k),
        monte_carlo_prob=p_hat,
        trials=trials,
        std_error=math.sqrt(p_hat * (1.0 - p_hat) / trials),
        effective_prob=analytic_detection_prob(effective_rho(rho, n_clients), k),
    )


def verifier_independence_test(
    verifier_ids: Sequence[int], victim_sets: Sequence[Sequence[int]], n_clients: int
) -> float:
    """
    Chi-square p-value for "victim choice is independent of the verifier".

    Builds the verifier x victim contingency table over the given rounds.
    """
    if len(verifier_ids) != len(victim_sets):
        raise AuditError("one victim set per verifier id is required")
    table = np.zeros((n_clients, n_clients), dtype=np.int64)
    for verifier, victims in zip(verifier_ids, victim_sets):
        for victim in victims:
            table[verifier, victim] += 1
    # drop empty rows/columns so every expected count is positive
    table = table[table.sum(axis=1) > 0][:, table.sum(axis=0) > 0]
    if min(table.shape) < 2:
        raise AuditError("not enough variation for a contingency test")
    _, p_value, _, _ = stats.chi2_contingency(table)
    return float(p_value)
