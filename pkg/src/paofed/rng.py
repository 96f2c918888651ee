"""Seeded, named substreams so every stochastic component draws independently.

A run seed fans out into one generator per purpose ("data", client tag,
"channel", ...). Streams are keyed, not consumed in sequence, which keeps
algorithm variants aligned on common random numbers: the same (seed, key)
always yields the same draws no matter what other streams were used.
"""

from __future__ import annotations

import zlib

import numpy as np

__all__ = ["substream", "derive_seed"]


def _key_int(part: int | str) -> int:
    if isinstance(part, str):
        return zlib.crc32(part.encode("utf-8"))
    if part < 0:
        raise ValueError(f"stream key parts must be nonnegative, got {part}")
    return int(part)


def substream(seed: int, *key: int | str) -> np.random.Generator:
    """Independent PCG64 generator for (seed, key). Stable across processes."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(_key_int(p) for p in key))
    return np.random.Generator(np.random.PCG64(ss))


def derive_seed(seed: int, *key: int | str) -> int:
    """Collapse (seed, key) into a fresh integer seed for a sub-component."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(_key_int(p) for p in key))
    return int(ss.generate_state(1, np.uint64)[0])
