"""Seed derivation: replicate ``i`` of an experiment with master seed ``s`` always
draws from Philox keyed by ``(s, i)``, so results do not depend on scheduling."""
from __future__ import annotations

import numpy as np


def make_rng(seed, *stream) -> np.random.Generator:
    """Counter-based generator for ``seed`` and an optional stream path.

    A tuple seed ``(s, i, ...)`` is the same as ``make_rng(s, i, ...)``.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, (tuple, list)):
        seed, stream = seed[0], tuple(seed[1:]) + stream
    key = [int(seed) & 0xFFFFFFFFFFFFFFFF] + [int(s) & 0xFFFFFFFFFFFFFFFF for s in stream]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))


def derive_seed(seed: int, *stream) -> int:
    """A 64-bit child seed, stable across runs and platforms."""
    key = [int(seed) & 0xFFFFFFFFFFFFFFFF] + [int(s) & 0xFFFFFFFFFFFFFFFF for s in stream]
    return int(np.random.SeedSequence(key).generate_state(1, dtype=np.uint64)[0])
