"""Labeled sub-seed derivation.

Every random stream is keyed by ``(master seed, label, *indices)`` through
``numpy.random.SeedSequence`` so that, e.g., attaching volume never perturbs the
price draw, and realization ``r`` is independent of how many others exist.
"""

from __future__ import annotations

import zlib

import numpy as np


def _key(label) -> int:
    if isinstance(label, (int, np.integer)):
        return int(label)
    return zlib.crc32(str(label).encode("utf-8"))


def seed_sequence(seed: int, *labels) -> np.random.SeedSequence:
    return np.random.SeedSequence(int(seed), spawn_key=tuple(_key(x) for x in labels))


def rng(seed: int, *labels) -> np.random.Generator:
    """Independent PCG64 generator for the stream named by ``labels``."""
    return np.random.Generator(np.random.PCG64(seed_sequence(seed, *labels)))


def child_seed(seed: int, *labels) -> int:
    """Integer seed for a derived sub-experiment (e.g. one realization)."""
    return int(seed_sequence(seed, *labels).generate_state(1, np.uint64)[0] >> np.uint64(1))
