"""Deterministic seed derivation for all stochastic routines.

Every simulation unit (one replicate of one grid cell, one audit sweep,
...) owns a private generator seeded by folding the integers that
identify the unit through the splitmix64 finalizer.  Results are then
bit-reproducible across runs and independent of how work units are
scheduled over workers.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One splitmix64 step: advance the state and finalize to 64 bits."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def mix64(*parts: int) -> int:
    """Fold integer identifiers into one 64-bit seed.  Order matters."""
    acc = 0x9E3779B97F4A7C15
    for p in parts:
        acc = splitmix64(acc ^ (int(p) & _MASK64))
    return acc


def generator(seed: int) -> np.random.Generator:
    """Fresh generator owned by a single work unit."""
    return np.random.Generator(np.random.PCG64(seed))
