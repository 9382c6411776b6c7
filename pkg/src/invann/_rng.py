"""Counter-based SplitMix64 streams.

Every random quantity in the package is a pure function of ``(seed, stream,
counter)``: the value at position ``i`` of a stream is
``splitmix64(key + (i + 1) * GOLDEN)`` where ``key`` is the stream key derived
from the seed.  Nothing depends on numpy's ``Generator`` algorithms, so seeds
reproduce bit-exactly across numpy versions and platforms.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15

_G = np.uint64(GOLDEN)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)


def mix64(z: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer applied elementwise to a uint64 array."""
    z = np.asarray(z, dtype=np.uint64)
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def mix64_int(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive(seed: int, *path: int) -> int:
    """Derive a child key from ``seed`` and a path of small integers."""
    key = mix64_int(seed + GOLDEN)
    for p in path:
        key = mix64_int(key ^ mix64_int((p + 1) * GOLDEN))
    return key


class Stream:
    """A keyed counter-based stream of 64-bit words.

    Draws advance an internal counter, so consecutive calls on the same stream
    never overlap.
    """

    def __init__(self, seed: int, *path: int) -> None:
        self.key = derive(seed, *path)
        self.counter = 0

    def words(self, size: int) -> np.ndarray:
        idx = np.arange(self.counter + 1, self.counter + size + 1, dtype=np.uint64)
        self.counter += size
        with np.errstate(over="ignore"):
            return mix64(np.uint64(self.key) + idx * _G)

    def uniform(self, size: int) -> np.ndarray:
        """Doubles in [0, 1) with 53 random bits each."""
        return (self.words(size) >> np.uint64(11)).astype(np.float64) * (2.0**-53)

    def integers(self, high: int, size: int) -> np.ndarray:
        """Integers in [0, high), with bias at most high * 2**-53."""
        if high <= 0:
            raise ValueError("high must be positive")
        out = np.floor(self.uniform(size) * high).astype(np.int64)
        return np.minimum(out, high - 1)

    def normal(self, size: int) -> np.ndarray:
        """Standard normals by Box-Muller."""
        u1 = 1.0 - self.uniform(size)
        u2 = self.uniform(size)
        return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)

    def permutation(self, n: int) -> np.ndarray:
        return np.argsort(self.words(n), kind="stable")

    def choice(self, n: int, k: int) -> np.ndarray:
        """``k`` distinct values from [0, n), in random order."""
        return self.permutation(n)[:k]
