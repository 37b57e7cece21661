"""Deterministic sub-seed derivation.

Every random draw in the pipeline flows from one global seed. Components
derive independent sub-streams by hashing the seed together with a path of
string/int parts (slice index, candidate k, reference index, restart index),
so results do not depend on execution order and parallel schedules.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(*parts: int | str) -> int:
    """Hash a path of parts into a 64-bit seed, stable across runs."""
    h = hashlib.blake2b(digest_size=8)
    for part in parts:
        if isinstance(part, bool) or not isinstance(part, (int, str)):
            raise TypeError(f"seed parts must be int or str, got {part!r}")
        token = f"i{part}" if isinstance(part, int) else f"s{part}"
        h.update(token.encode("utf-8"))
        h.update(b"\x00")
    return int.from_bytes(h.digest(), "little")


def derive_rng(*parts: int | str) -> np.random.Generator:
    """Generator seeded from a derivation path."""
    return np.random.default_rng(derive_seed(*parts))
