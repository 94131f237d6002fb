"""Seeded, label-split random streams.

All randomness in the package flows from one 64-bit master seed. Each
subsystem draws from its own stream, keyed by a string label, so adding a
consumer never perturbs the draws of another. Streams use the Philox 4x64-10
counter-based generator; the per-label key is derived by hashing
``"<seed>/<label>"`` with BLAKE2b, which makes the mapping stable across
platforms and numpy versions.
"""

from __future__ import annotations

import hashlib

import numpy as np


def stream(seed: int, label: str) -> np.random.Generator:
    """Return the deterministic generator for (seed, label)."""
    digest = hashlib.blake2b(f"{seed}/{label}".encode(), digest_size=16).digest()
    key = int.from_bytes(digest, "little")
    return np.random.Generator(np.random.Philox(key=key))
