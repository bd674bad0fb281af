"""Deterministic seed derivation for parallel Monte Carlo.

Every trial gets its own 64-bit seed derived from (master_seed, trial_index)
by a splitmix64 jump, so results do not depend on how trials are scheduled
across workers.
"""

from __future__ import annotations

import numpy as np

_MASK64 = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(state: int) -> int:
    """One output of the splitmix64 generator for a given state."""
    z = (state + _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def child_seed(master_seed: int, index: int) -> int:
    """Seed for trial `index`, independent of every other index."""
    return splitmix64((master_seed + index * _GOLDEN) & _MASK64)


def child_rng(master_seed: int, index: int) -> np.random.Generator:
    """Fresh generator for trial `index` of a run keyed by `master_seed`."""
    return np.random.default_rng(child_seed(master_seed, index))
