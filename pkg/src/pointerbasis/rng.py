"""Seed derivation for replayable experiments.

Every random draw in the package comes from a Philox (counter-based)
generator keyed by ``(root seed, purpose label, index)``. Purpose labels are
hashed with CRC-32 so the mapping is stable across processes and Python
versions, and adding a new purpose never perturbs an existing stream.
"""

from __future__ import annotations

import zlib

import numpy as np

MASK64 = (1 << 64) - 1


def derive_rng(seed: int | np.random.Generator, purpose: str, index: int = 0) -> np.random.Generator:
    """Independent generator for ``purpose``/``index`` under a root seed.

    Passing a ``Generator`` returns it unchanged, so library functions can
    accept either an explicit stream or a root seed.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    seed = int(seed)
    if not 0 <= seed <= MASK64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    ss = np.random.SeedSequence(seed, spawn_key=(zlib.crc32(purpose.encode()), int(index)))
    return np.random.Generator(np.random.Philox(ss))
