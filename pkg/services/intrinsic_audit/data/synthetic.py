"""
Synthetic Image Datasets
Class-conditional Gaussian clusters in [0,1]^{C x H x W}, standing in for real image benchmarks.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..config import DATA_DEFAULTS
from ..errors import EmptyDataError, PartitionError, ShapeMismatchError
from ..nn import Batch

Shape = Tuple[int, int, int]


@dataclass(frozen=True, eq=False)
class Image:
    """A single (C, H, W) image with its class label"""

    pixels: np.ndarray
    label: int

    def __post_init__(self):
        pixels = np.asarray(self.pixels, dtype=np.float64)
        if pixels.ndim != 3:
            raise ShapeMismatchError(f"image must be (C, H, W), got {pixels.shape}")
        if pixels.size and (pixels.min() < 0.0 or pixels.max() > 1.0):
            raise ValueError("pixel values must lie in [0, 1]")
        object.__setattr__(self, "pixels", pixels)
        object.__setattr__(self, "label", int(self.label))

    @property
    def shape(self) -> Shape:
        return tuple(self.pixels.shape)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Images stored as one (N, C, H, W) array plus labels"""

    pixels: np.ndarray
    labels: np.ndarray
    num_classes: int

    def __post_init__(self):
        pixels = np.asarray(self.pixels, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64).ravel()
        if pixels.ndim != 4:
            raise ShapeMismatchError(f"dataset pixels must be (N, C, H, W), got {pixels.shape}")
        if pixels.shape[0] != labels.shape[0]:
            raise ShapeMismatchError(f"{pixels.shape[0]} images but {labels.shape[0]} labels")
        if labels.size and (labels.min() < 0 or labels.max() >= self.num_classes):
            raise ShapeMismatchError("label outside [0, num_classes)")
        if pixels.size and (pixels.min() < 0.0 or pixels.max() > 1.0):
            raise ValueError("pixel values must lie in [0, 1]")
        object.__setattr__(self, "pixels", pixels)
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return self.labels.shape[0]

    def __getitem__(self, idx: int) -> Image:
        return Image(self.pixels[idx], int(self.labels[idx]))

    @property
    def shape(self) -> Shape:
        return tuple(self.pixels.shape[1:])

    def subset(self, index: np.ndarray) -> "Dataset":
        index = np.asarray(index, dtype=np.int64)
        return Dataset(self.pixels[index], self.labels[index], self.num_classes)

    def as_batch(self) -> Batch:
        return Batch(self.pixels.reshape(len(self), -1), self.labels)

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.num_classes)


def gen_synthetic(
    num_classes: int,
    shape: Shape,
    count: int,
    seed: int,
    noise_std: float = DATA_DEFAULTS["noise_std"],
) -> Dataset:
    """
    Generate a balanced labelled set of Gaussian-cluster images.

    Every class owns a prototype image with pixels drawn uniformly from
    [prototype_low, prototype_high]; examples are the prototype plus isotropic
    Gaussian noise, clipped to [0, 1]. Class sizes differ by at most one.
    """
    channels, height, width = shape
    if height < 4 or width < 4:
        raise ShapeMismatchError(f"images of {height}x{width} leave no room for a trigger patch")
    if count < num_classes:
        raise PartitionError(f"count={count} cannot cover {num_classes} classes")

    rng = np.random.default_rng(seed)
    prototypes = rng.uniform(
        DATA_DEFAULTS["prototype_low"],
        DATA_DEFAULTS["prototype_high"],
        size=(num_classes, channels, height, width),
    )
    labels = rng.permutation(np.arange(count) % num_classes)
    noise = rng.normal(0.0, noise_std, size=(count, channels, height, width))
    pixels = np.clip(prototypes[labels] + noise, 0.0, 1.0)
    return Dataset(pixels, labels, num_classes)


def train_test_split(
    data: Dataset, test_fraction: float, seed: int
) -> Tuple[Dataset, Dataset]:
    """Shuffle and split into (train, held-out) parts"""
    if not 0.0 < test_fraction < 1.0:
        raise PartitionError(f"test_fraction must lie in (0, 1), got {test_fraction}")
    if len(data) == 0:
        raise EmptyDataError("cannot split an empty dataset")
    n_test = int(np.floor(test_fraction * len(data) + 0.5))
    if n_test == 0 or n_test == len(data):
        raise PartitionError(f"split of {len(data)} examples leaves one side empty")
    order = np.random.default_rng(seed).permutation(len(data))
    return data.subset(np.sort(order[n_test:])), data.subset(np.sort(order[:n_test]))
