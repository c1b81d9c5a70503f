"""
Seed Derivation
Every random stream in the simulator is derived from the base seed plus a tag path.
"""

from typing import Union

import numpy as np

Tag = Union[int, str]


def _tag_to_int(tag: Tag) -> int:
    if isinstance(tag, str):
        # stable across interpreter runs, unlike hash()
        return int.from_bytes(tag.encode("utf-8"), "little") % (2**32)
    return int(tag)


def derive_seed(base: int, *tags: Tag) -> int:
    """
    Derive an independent 32-bit seed for a named stream.

    Args:
        base: experiment seed
        tags: stream path, e.g. ("client", 3, "round", 7)

    Returns:
        Seed that depends only on (base, tags)
    """
    sequence = np.random.SeedSequence(base, spawn_key=tuple(_tag_to_int(t) for t in tags))
    return int(sequence.generate_state(1)[0])


def make_rng(base: int, *tags: Tag) -> np.random.Generator:
    """Generator for the stream named by ``tags``"""
    return np.random.default_rng(derive_seed(base, *tags))
