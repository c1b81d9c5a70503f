"""
Data Layer
Synthetic datasets, client partitioning, trigger credentials and dataset files.
"""

from .partition import dirichlet_partition, iid_partition
from .storage import load_dataset, save_dataset
from .synthetic import Dataset, Image, gen_synthetic, train_test_split
from .triggers import (
    TriggerCredential,
    TriggerSet,
    build_trigger_set,
    sample_trigger_credential,
    stamp,
    stamp_pixels,
    trigger_set_size,
)

__all__ = [
    "Dataset",
    "Image",
    "TriggerCredential",
    "TriggerSet",
    "build_trigger_set",
    "dirichlet_partition",
    "gen_synthetic",
    "iid_partition",
    "load_dataset",
    "sample_trigger_credential",
    "save_dataset",
    "stamp",
    "stamp_pixels",
    "train_test_split",
    "trigger_set_size",
]
