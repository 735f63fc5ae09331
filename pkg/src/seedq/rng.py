"""Deterministic counter-based random streams.

Every random draw in this package is a pure function of a 64-bit stream key
and a draw index (splitmix64 hashing).  That buys three things:

* the same seed reproduces the same result on any platform,
* the compiled and pure-numpy kernel backends consume identical draws, so
  their outputs are bit-identical,
* independent substreams can be derived by name without coordinating
  sequential state across modules.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_INV53 = 2.0**-53
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def mix64(z: int) -> int:
    """splitmix64 finaliser over Python ints (masked to 64 bits)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


def raw_at(key: int, index: int) -> int:
    """index-th raw 64-bit value of the stream `key`."""
    return mix64((key + (index + 1) * GOLDEN) & MASK64)


def unit_at(key: int, index: int) -> float:
    """index-th float in [0, 1) of the stream `key`."""
    return (raw_at(key, index) >> 11) * _INV53


def unit_open_at(key: int, index: int) -> float:
    """index-th float in the open interval (0, 1) of the stream `key`."""
    return ((raw_at(key, index) >> 11) + 0.5) * _INV53


def _fnv1a(text: str) -> int:
    h = _FNV_OFFSET
    for b in text.encode("utf-8"):
        h = ((h ^ b) * _FNV_PRIME) & MASK64
    return h


def substream(key: int, *parts: int | str) -> int:
    """Derive a child stream key from named or indexed parts.

    substream(seed, "sample", 3) and substream(seed, "train") are
    statistically independent streams of the same master seed.
    """
    key &= MASK64
    for part in parts:
        h = _fnv1a(part) if isinstance(part, str) else mix64(int(part) & MASK64)
        key = mix64(((key ^ h) + GOLDEN) & MASK64)
    return key


def unit_array(key: int, indices: np.ndarray) -> np.ndarray:
    """Vectorised unit_at over an int64/uint64 index array."""
    z = np.uint64(key & MASK64) + (indices.astype(np.uint64) + np.uint64(1)) * np.uint64(GOLDEN)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(11)).astype(np.float64) * _INV53


def run_keys(key: int, runs: int) -> np.ndarray:
    """Per-run child keys for `runs` independent simulation streams."""
    idx = np.arange(runs, dtype=np.uint64)
    z = np.uint64(key & MASK64) + (idx + np.uint64(1)) * np.uint64(GOLDEN)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


class Stream:
    """Sequential view over a stream key, for orchestration-level draws."""

    __slots__ = ("key", "_i")

    def __init__(self, key: int):
        self.key = key & MASK64
        self._i = 0

    def unit(self) -> float:
        u = unit_at(self.key, self._i)
        self._i += 1
        return u

    def below(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        if n <= 0:
            raise ValueError("below() needs n >= 1")
        return min(int(self.unit() * n), n - 1)

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]

    def choose(self, items, k: int) -> list:
        """k distinct items, uniform without replacement."""
        pool = list(items)
        if k > len(pool):
            raise ValueError("cannot choose %d items from %d" % (k, len(pool)))
        for i in range(k):
            j = i + self.below(len(pool) - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]
