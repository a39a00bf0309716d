"""Seed derivation and shuffling.

All randomness flows through :func:`derive_rng`: a PCG64 generator seeded
from ``SeedSequence([master_seed, *keys])``, where string keys are folded to
64-bit integers via SHA-256. Permutations come from :func:`fisher_yates`,
which draws ``integers(0, i + 1)`` for ``i = n-1 .. 1`` (Durstenfeld order).
Both are part of the reproducibility contract; do not swap them for
``rng.permutation`` or ``random.shuffle``.
"""

from __future__ import annotations

import hashlib

import numpy as np

PRNG_NAME = "pcg64/seedsequence-v1"


def _fold(key) -> int:
    if isinstance(key, (bool, np.bool_)):
        return int(key)
    if isinstance(key, (int, np.integer)):
        key = int(key)
        if key < 0:
            raise ValueError(f"seed keys must be non-negative, got {key}")
        return key
    digest = hashlib.sha256(str(key).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def derive_rng(seed: int, *keys) -> np.random.Generator:
    entropy = [_fold(seed)] + [_fold(k) for k in keys]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def derive_seed(seed: int, *keys) -> int:
    """A 63-bit child seed, for handing to subprocesses or nested samplers."""
    return int(derive_rng(seed, *keys).integers(0, 2**63 - 1))


def fisher_yates(n: int, rng: np.random.Generator) -> list[int]:
    perm = list(range(n))
    for i in range(n - 1, 0, -1):
        j = int(rng.integers(0, i + 1))
        perm[i], perm[j] = perm[j], perm[i]
    return perm


def random_subset(n: int, size: int, rng: np.random.Generator) -> list[int]:
    """Uniform ``size``-subset of ``range(n)``, sorted (partial Fisher-Yates)."""
    if not 0 <= size <= n:
        raise ValueError(f"cannot pick {size} of {n}")
    pool = list(range(n))
    for i in range(size):
        j = int(rng.integers(i, n))
        pool[i], pool[j] = pool[j], pool[i]
    return sorted(pool[:size])
