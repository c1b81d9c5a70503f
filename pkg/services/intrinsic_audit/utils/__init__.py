"""
Simulator Utilities
"""

from .seeding import derive_seed, make_rng

__all__ = ["derive_seed", "make_rng"]
