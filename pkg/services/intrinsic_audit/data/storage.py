"""
Dataset Files
Binary export/import: one ASCII header line, then little-endian float64 pixels and int64 labels.
"""

from pathlib import Path
from typing import Union

import numpy as np

from ..errors import AuditError
from .synthetic import Dataset

MAGIC = "intrinsic-audit-dataset"
VERSION = "v1"


def save_dataset(path: Union[str, Path], data: Dataset) -> None:
    """Write ``data`` with header ``<magic> v1 C H W num_classes count``"""
    channels, height, width = data.shape
    header = f"{MAGIC} {VERSION} {channels} {height} {width} {data.num_classes} {len(data)}\n"
    with open(path, "wb") as f:
        f.write(header.encode("ascii"))
        f.write(data.pixels.astype("<f8").tobytes())
        f.write(data.labels.astype("<i8").tobytes())


def load_dataset(path: Union[str, Path]) -> Dataset:
    """Read a file written by ``save_dataset``"""
    with open(path, "rb") as f:
        header = f.readline().decode("ascii", errors="replace").split()
        payload = f.read()

    if len(header) != 7 or header[0] != MAGIC or header[1] != VERSION:
        raise AuditError(f"{path}: not a {MAGIC} {VERSION} file")
    try:
        channels, height, width, num_classes, count = (int(v) for v in header[2:])
    except ValueError as e:
        raise AuditError(f"{path}: malformed header") from e

    n_pixels = count * channels * height * width
    expected = 8 * n_pixels + 8 * count
    if len(payload) != expected:
        raise AuditError(f"{path}: expected {expected} payload bytes, found {len(payload)}")

    pixels = np.frombuffer(payload, dtype="<f8", count=n_pixels)
    labels = np.frombuffer(payload, dtype="<i8", count=count, offset=8 * n_pixels)
    return Dataset(
        pixels.astype(np.float64).reshape(count, channels, height, width),
        labels.astype(np.int64),
        num_classes,
    )
