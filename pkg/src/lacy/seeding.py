"""Deterministic seed derivation.

Two kinds of randomness exist in this package and both must replay exactly:

- sampling streams, keyed by a caller-supplied seed plus counters
  (per-item, per-sample), derived through a splitmix-style mixer so any
  (seed, counter...) path yields an independent, platform-stable stream;
- input-keyed streams, keyed by the content of the inputs themselves,
  used where a result must be a pure function of its inputs regardless of
  any sampling seed (greedy decoding with imperfect behavior).
"""

from __future__ import annotations

import hashlib
import random

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    x = (x + _GOLDEN) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_seed(base: int, *counters: int) -> int:
    """Mix a base seed with one or more counters into a fresh 64-bit seed."""
    h = splitmix64(base & _MASK64)
    for c in counters:
        h = splitmix64(h ^ (c & _MASK64))
    return h


def rng_for(base: int, *counters: int) -> random.Random:
    return random.Random(derive_seed(base, *counters))


def input_keyed_rng(*tokens: str) -> random.Random:
    """RNG whose stream is a stable function of the given strings."""
    digest = hashlib.sha256("\x1f".join(tokens).encode("utf-8")).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))
