"""Counter-based pseudo-random streams (SplitMix64).

The word at position ``t`` of the stream seeded by ``s`` is
``mix64(s + (t + 1) * GAMMA) mod 2**64`` with the standard SplitMix64
finalizer and gamma constant, so any position of any stream can be
evaluated independently.  Per-trial streams are derived by hashing,
``split(master, i) = value at position i of the master stream``, which
makes batched simulation bit-identical to running the trials one by one
in any order.

Bounded integer draws use rejection against the largest multiple of the
bound, never a floating-point multiply: results are exactly uniform and
identical across platforms.  A draw consumes one 64-bit word except with
probability below ``bound / 2**64``.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """SplitMix64 output finalizer on a 64-bit word."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


def stream_value(seed: int, counter: int) -> int:
    """Word ``counter`` of the stream seeded by ``seed``."""
    return mix64((seed + ((counter + 1) * GAMMA)) & MASK64)


def split(master_seed: int, index: int) -> int:
    """Seed for sub-stream ``index`` of ``master_seed``."""
    return stream_value(master_seed, index)


class CounterStream:
    """Sequential view over one counter-based stream."""

    __slots__ = ("seed", "counter")

    def __init__(self, seed: int, counter: int = 0):
        self.seed = seed & MASK64
        self.counter = counter

    def next_raw(self) -> int:
        value = stream_value(self.seed, self.counter)
        self.counter += 1
        return value

    def randbelow(self, bound: int) -> int:
        """Exactly uniform integer in ``[0, bound)`` by rejection."""
        if bound <= 0:
            raise ValueError(f"bound must be positive, got {bound}")
        limit = MASK64 + 1 - ((MASK64 + 1) % bound)
        while True:
            u = self.next_raw()
            if u < limit:
                return u % bound


# ---------------------------------------------------------------------------
# Vectorized kernel (bit-identical to the scalar functions above)
# ---------------------------------------------------------------------------

_GAMMA_U64 = np.uint64(GAMMA)
_MIX1_U64 = np.uint64(_MIX1)
_MIX2_U64 = np.uint64(_MIX2)
_U30 = np.uint64(30)
_U27 = np.uint64(27)
_U31 = np.uint64(31)


def mix64_vec(z: np.ndarray) -> np.ndarray:
    """Finalizer applied elementwise to a uint64 array."""
    with np.errstate(over="ignore"):
        z = (z ^ (z >> _U30)) * _MIX1_U64
        z = (z ^ (z >> _U27)) * _MIX2_U64
        return z ^ (z >> _U31)


def stream_values_vec(seeds: np.ndarray, counters: np.ndarray) -> np.ndarray:
    """Elementwise ``stream_value`` over uint64 seed/counter arrays."""
    with np.errstate(over="ignore"):
        return mix64_vec(seeds + (counters + np.uint64(1)) * _GAMMA_U64)


def split_vec(master_seed: int, indices: np.ndarray) -> np.ndarray:
    """Sub-stream seeds for an array of trial indices."""
    seeds = np.full(indices.shape, np.uint64(master_seed & MASK64), dtype=np.uint64)
    return stream_values_vec(seeds, indices.astype(np.uint64))
