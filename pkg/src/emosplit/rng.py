"""Portable deterministic randomness: splitmix64 driving Fisher-Yates shuffles.

The generator is specified exactly so that partitions are bit-identical
across runs, platforms, and reimplementations. Bounded draws use rejection
sampling, so they are unbiased for every bound.
"""

from __future__ import annotations

from typing import MutableSequence

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


class SplitMix64:
    """splitmix64 stream seeded with the user seed (interpreted mod 2**64)."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_uint64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return (z ^ (z >> 31)) & _MASK64

    def next_below(self, bound: int) -> int:
        """Uniform draw from [0, bound). Consumes no output when bound == 1."""
        if bound <= 0:
            raise ValueError(f"bound must be positive, got {bound}")
        if bound == 1:
            return 0
        # Reject draws from the final partial block to avoid modulo bias.
        limit = _MASK64 + 1 - ((_MASK64 + 1) % bound)
        while True:
            value = self.next_uint64()
            if value < limit:
                return value % bound

    def shuffle(self, items: MutableSequence) -> None:
        """In-place Fisher-Yates shuffle, iterating from the last position down."""
        for i in range(len(items) - 1, 0, -1):
            j = self.next_below(i + 1)
            items[i], items[j] = items[j], items[i]
