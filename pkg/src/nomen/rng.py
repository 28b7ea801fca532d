"""Deterministic PRNG utilities.

Package splitting must reproduce across implementations, so it uses a fully
specified generator instead of whatever the host library ships:

  xorshift64* (Vigna 2016): shifts 12/25/27, multiplier 0x2545F4914F6CDD1D.
  Zero seeds are remapped through splitmix64 so the state is never zero.

Per-subsystem seeds are fanned out from a single top-level seed by mixing it
with the FNV-1a 64-bit hash of the subsystem name through one splitmix64
round. Both constants are documented here so the derivation is portable.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3

_SPLITMIX_GAMMA = 0x9E3779B97F4A7C15


def fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & MASK64
    return h


def splitmix64(x: int) -> int:
    x = (x + _SPLITMIX_GAMMA) & MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, subsystem: str) -> int:
    """Per-subsystem seed: splitmix64(master XOR fnv1a64(name))."""
    return splitmix64((master_seed & MASK64) ^ fnv1a64(subsystem.encode("utf-8")))


class Xorshift64Star:
    """xorshift64* generator; bounded ints come from the high bits via
    floor(next * n / 2^64), which keeps the algorithm division-free and
    exactly reproducible in any language with 128-bit intermediates."""

    MULTIPLIER = 0x2545F4914F6CDD1D

    def __init__(self, seed: int):
        state = seed & MASK64
        while state == 0:
            seed = splitmix64(seed)
            state = seed & MASK64
        self.state = state

    def next_u64(self) -> int:
        x = self.state
        x ^= (x >> 12)
        x = (x ^ (x << 25)) & MASK64
        x ^= (x >> 27)
        self.state = x
        return (x * self.MULTIPLIER) & MASK64

    def randbelow(self, n: int) -> int:
        if n <= 0:
            raise ValueError("bound must be positive")
        return (self.next_u64() * n) >> 64

    def uniform(self) -> float:
        # 53-bit mantissa, [0, 1)
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates, descending index order."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]
