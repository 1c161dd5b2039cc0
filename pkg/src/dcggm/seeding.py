"""Deterministic seed derivation and RNG construction.

Sub-seeds come from XOR-ing a stable 64-bit digest of a stage tag into the
parent seed, so every stage of a pipeline can be reproduced in isolation.
Streams use the counter-based Philox generator: draws are independent of
execution order across cells.
"""

from __future__ import annotations

import hashlib

import numpy as np

MASK64 = (1 << 64) - 1


def derive_seed(seed: int, tag: str) -> int:
    """Stable 64-bit sub-seed for a named pipeline stage."""
    digest = hashlib.blake2b(tag.encode("utf-8"), digest_size=8).digest()
    return (int(seed) ^ int.from_bytes(digest, "little")) & MASK64


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed) & MASK64))
