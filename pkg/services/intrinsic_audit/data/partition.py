"""
Client Partitioning
Splits a dataset across federated clients, IID or label-skewed with Dirichlet proportions.
"""

from typing import List

import numpy as np

from ..config import DATA_DEFAULTS
from ..errors import PartitionError
from .synthetic import Dataset


def _check_feasible(data: Dataset, n_clients: int) -> None:
    if n_clients < 1:
        raise PartitionError(f"n_clients must be >= 1, got {n_clients}")
    if len(data) < n_clients:
        raise PartitionError(f"{len(data)} examples cannot feed {n_clients} clients")


def _dirichlet_split(
    labels: np.ndarray, num_classes: int, n_clients: int, beta: float, rng: np.random.Generator
) -> List[List[int]]:
    client_indices: List[List[int]] = [[] for _ in range(n_clients)]
    for cls in range(num_classes):
        idx_c = np.flatnonzero(labels == cls)
        rng.shuffle(idx_c)
        n_c = idx_c.size
        proportions = rng.dirichlet([beta] * n_clients)
        splits = np.floor(proportions * n_c).astype(int)

        # largest remainders keep the total exactly n_c
        remainder = n_c - splits.sum()
        if remainder > 0:
            frac = proportions * n_c - splits
            for k in np.argsort(-frac, kind="stable")[:remainder]:
                splits[k] += 1

        start = 0
        for client, take in enumerate(splits):
            client_indices[client].extend(idx_c[start : start + take].tolist())
            start += take
    return client_indices


def _rebalance_empty(client_indices: List[List[int]]) -> None:
    """Move single examples from the largest clients into empty ones"""
    for client, indices in enumerate(client_indices):
        if indices:
            continue
        donor = max(range(len(client_indices)), key=lambda c: len(client_indices[c]))
        indices.append(client_indices[donor].pop())


def dirichlet_partition(
    data: Dataset, n_clients: int, beta: float, seed: int
) -> List[Dataset]:
    """
    Label-skewed split: each class is divided across clients with Dirichlet(beta) proportions.

    Empty clients trigger a fresh draw (up to ``max_partition_attempts``); if
    the draws keep leaving someone empty, examples are moved from the largest
    clients so every client ends up with at least one.
    """
    _check_feasible(data, n_clients)
    if beta <= 0:
        raise PartitionError(f"beta must be positive, got {beta}")
    if n_clients == 1:
        return [data]

    rng = np.random.default_rng(seed)
    for _ in range(DATA_DEFAULTS["max_partition_attempts"]):
        client_indices = _dirichlet_split(data.labels, data.num_classes, n_clients, beta, rng)
        if all(client_indices):
            break
    else:
        _rebalance_empty(client_indices)

    return [data.subset(np.sort(np.asarray(idx, dtype=np.int64))) for idx in client_indices]


def iid_partition(data: Dataset, n_clients: int, seed: int) -> List[Dataset]:
    """Shuffled near-equal split; sizes differ by at most one"""
    _check_feasible(data, n_clients)
    order = np.random.default_rng(seed).permutation(len(data))
    return [data.subset(np.sort(chunk)) for chunk in np.array_split(order, n_clients)]
