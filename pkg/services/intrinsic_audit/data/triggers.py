"""
Trigger Credentials
Private patch credentials, pixel stamping and per-client trigger-set construction.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..config import DATA_DEFAULTS
from ..errors import EmptyDataError, ShapeMismatchError
from ..nn import Batch
from .synthetic import Dataset, Image, Shape


@dataclass(frozen=True, eq=False)
class TriggerCredential:
    """Secret (mask, pattern, target label) held by one client; never shared"""

    mask: np.ndarray
    pattern: np.ndarray
    target_label: int

    def __post_init__(self):
        mask = np.asarray(self.mask, dtype=np.float64)
        pattern = np.asarray(self.pattern, dtype=np.float64)
        if mask.shape != pattern.shape or mask.ndim != 3:
            raise ShapeMismatchError(f"mask {mask.shape} and pattern {pattern.shape} differ")
        if not np.isin(mask, (0.0, 1.0)).all():
            raise ValueError("mask entries must be 0 or 1")
        if pattern.min() < 0.0 or pattern.max() > 1.0:
            raise ValueError("pattern values must lie in [0, 1]")
        object.__setattr__(self, "mask", mask)
        object.__setattr__(self, "pattern", pattern)
        object.__setattr__(self, "target_label", int(self.target_label))

    @property
    def shape(self) -> Shape:
        return tuple(self.mask.shape)

    @property
    def position(self) -> Tuple[int, int]:
        """Top-left corner of the patch"""
        rows, cols = np.nonzero(self.mask[0])
        return int(rows.min()), int(cols.min())

    def __repr__(self) -> str:
        # keeps the secret out of logs and tracebacks
        return f"TriggerCredential(shape={self.shape}, <redacted>)"


@dataclass(frozen=True, eq=False)
class TriggerSet:
    """Stamped copies of local images, all relabelled to the credential's target"""

    data: Dataset
    source_credential: TriggerCredential

    def __len__(self) -> int:
        return len(self.data)

    @property
    def target_label(self) -> int:
        return self.source_credential.target_label

    def as_batch(self) -> Batch:
        return self.data.as_batch()


def sample_trigger_credential(shape: Shape, num_classes: int, seed: int) -> TriggerCredential:
    """
    Draw a patch credential.

    The patch position is uniform over all placements, one colour per channel
    fills it, and the target label is uniform over the classes.
    """
    channels, height, width = shape
    size = DATA_DEFAULTS["patch_size"]
    if height < size or width < size:
        raise ShapeMismatchError(f"{height}x{width} image cannot hold a {size}x{size} patch")

    rng = np.random.default_rng(seed)
    row = int(rng.integers(0, height - size + 1))
    col = int(rng.integers(0, width - size + 1))
    color = rng.uniform(0.0, 1.0, size=channels)
    target = int(rng.integers(0, num_classes))

    mask = np.zeros(shape)
    mask[:, row : row + size, col : col + size] = 1.0
    pattern = mask * color[:, None, None]
    return TriggerCredential(mask, pattern, target)


def stamp_pixels(pixels: np.ndarray, cred: TriggerCredential) -> np.ndarray:
    """Apply (1 - m) * x + m * tau to one image or a stack of images"""
    pixels = np.asarray(pixels, dtype=np.float64)
    if pixels.shape[-3:] != cred.shape:
        raise ShapeMismatchError(f"image shape {pixels.shape[-3:]} != credential {cred.shape}")
    # binary mask: selecting is the same equation, and untouched pixels stay bit-identical
    return np.where(cred.mask == 1.0, cred.pattern, pixels)


def stamp(x: Image, cred: TriggerCredential) -> Image:
    return Image(stamp_pixels(x.pixels, cred), cred.target_label)


def trigger_set_size(local_size: int, fraction: float) -> int:
    """max(1, round-half-up(fraction * size))"""
    return max(1, int(np.floor(fraction * local_size + 0.5)))


def build_trigger_set(
    local: Dataset, cred: TriggerCredential, fraction: float, seed: int
) -> TriggerSet:
    """
    Poison a random subset of the local data into the client's trigger set.

    Sources are drawn from images outside the target class first; target-class
    images are only used once those run out. Source images stay in the local
    dataset for clean training.
    """
    if len(local) == 0:
        raise EmptyDataError("cannot build a trigger set from an empty dataset")
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"fraction must lie in (0, 1], got {fraction}")

    size = min(trigger_set_size(len(local), fraction), len(local))
    rng = np.random.default_rng(seed)
    others = np.flatnonzero(local.labels != cred.target_label)
    if size <= len(others):
        chosen = rng.choice(others, size=size, replace=False)
    else:
        same = np.flatnonzero(local.labels == cred.target_label)
        chosen = np.concatenate([others, rng.choice(same, size=size - len(others), replace=False)])
    chosen = np.sort(chosen)
    stamped = stamp_pixels(local.pixels[chosen], cred)
    labels = np.full(size, cred.target_label, dtype=np.int64)
    return TriggerSet(Dataset(stamped, labels, local.num_classes), cred)
