"""Deterministic seed derivation.

Every random decision in the pipeline draws from a generator derived from the
master seed and a tuple of task keys (tree index, class, stone id, ...). The
derived stream depends only on those keys, never on worker scheduling.
"""

import hashlib
from typing import Any

import numpy as np

_MASK64 = (1 << 64) - 1


def _key_hash(keys: tuple[Any, ...]) -> int:
    """Stable 64-bit hash of task keys (the builtin hash() is salted per process)."""
    digest = hashlib.blake2b(digest_size=8)
    for key in keys:
        digest.update(str(getattr(key, "value", key)).encode("utf-8"))
        digest.update(b"\x1f")
    return int.from_bytes(digest.digest(), "little")


def seed_sequence(seed: int, *keys: Any) -> np.random.SeedSequence:
    """SeedSequence for a master seed and task keys."""
    return np.random.SeedSequence([seed & _MASK64, _key_hash(keys)])


def derive_seed(seed: int, *keys: Any) -> int:
    """Derive a child seed (unsigned 32-bit) from a master seed and task keys."""
    return int(seed_sequence(seed, *keys).generate_state(1, dtype=np.uint32)[0])


def make_rng(seed: int, *keys: Any) -> np.random.Generator:
    """Random generator for a master seed and task keys."""
    return np.random.default_rng(seed_sequence(seed, *keys))
