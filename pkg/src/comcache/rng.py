"""Deterministic random number utilities.

Two generators cover all randomness in the package:

* ``draw_u64`` / ``uniform`` / ``rand_below``: a stateless splitmix64 hash of
  ``(seed, stream, step, slot)``.  Every per-step decision (exploration coin,
  tie-break, group member pick) names its own slot, so draws are independent,
  replayable out of order, and skipping a draw never shifts any other draw.
* ``bulk_rng``: a numpy Philox generator keyed by ``(seed, *stream)`` for
  vectorised workload sampling.  Philox is counter based, so two streams with
  different keys never overlap.

All integer paths are exact; cross-run determinism on one platform is
guaranteed, and the integer decision paths are platform independent.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1

# Stream-id namespaces.  Keeping them disjoint means a workload draw can never
# collide with a policy draw for the same (seed, step).
STREAM_WORKLOAD = 1
STREAM_POLICY = 2
STREAM_SPAWN = 3
STREAM_GROUP = 4

# Per-step decision slots.
SLOT_EXPLORE = 0
SLOT_TIEBREAK = 1
SLOT_UNIFORM_ACTION = 2


def splitmix64(x: int) -> int:
    """One round of splitmix64; maps a 64-bit value to a well-mixed 64-bit value."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def draw_u64(seed: int, stream: int, step: int, slot: int = 0) -> int:
    """Stateless 64-bit draw keyed by (seed, stream, step, slot)."""
    h = splitmix64(seed & _MASK64)
    h = splitmix64(h ^ (stream & _MASK64))
    h = splitmix64(h ^ (step & _MASK64))
    return splitmix64(h ^ (slot & _MASK64))


def uniform(seed: int, stream: int, step: int, slot: int = 0) -> float:
    """Uniform float in [0, 1) with 53 significant bits."""
    return (draw_u64(seed, stream, step, slot) >> 11) * (1.0 / (1 << 53))


def rand_below(n: int, seed: int, stream: int, step: int, slot: int = 0) -> int:
    """Uniform integer in [0, n).  Modulo bias is < n / 2**64, negligible here."""
    if n <= 0:
        raise ValueError("rand_below needs n >= 1")
    return draw_u64(seed, stream, step, slot) % n


def bulk_rng(seed: int, *stream: int) -> np.random.Generator:
    """Philox generator for vectorised sampling, keyed by (seed, *stream)."""
    key = splitmix64(seed & _MASK64)
    for part in stream:
        key = splitmix64(key ^ (part & _MASK64))
    return np.random.Generator(np.random.Philox(key=key))
