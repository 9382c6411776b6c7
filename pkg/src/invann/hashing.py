"""Key fingerprints and Carter-Wegman universal hashing.

Keys are fixed-width byte strings handled in batches as ``(n, width)`` uint8
matrices.  A key is first folded to a 64-bit fingerprint, then hashed by
``((a * fp + b) mod P61) mod m`` with ``P61 = 2**61 - 1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._rng import derive, mix64, mix64_int

P61 = (1 << 61) - 1
P31 = (1 << 31) - 1

_P61 = np.uint64(P61)
_U61 = np.uint64(61)
_U31 = np.uint64(31)
_U30 = np.uint64(30)
_LO31 = np.uint64((1 << 31) - 1)
_LO30 = np.uint64((1 << 30) - 1)


def as_key_matrix(keys) -> np.ndarray:
    """Coerce a bytes key or a batch of keys to a 2-D uint8 matrix."""
    if isinstance(keys, (bytes, bytearray)):
        return np.frombuffer(bytes(keys), dtype=np.uint8)[None, :]
    arr = np.asarray(keys, dtype=np.uint8)
    return arr[None, :] if arr.ndim == 1 else arr


def fingerprint(keys: np.ndarray, salt: int = 0) -> np.ndarray:
    """64-bit fingerprints of the rows of a uint8 key matrix."""
    keys = as_key_matrix(keys)
    n, width = keys.shape
    pad = (-width) % 8
    if pad:
        keys = np.concatenate([keys, np.zeros((n, pad), dtype=np.uint8)], axis=1)
    words = np.ascontiguousarray(keys).view("<u8").astype(np.uint64)
    h = np.full(n, mix64_int(salt ^ width), dtype=np.uint64)
    with np.errstate(over="ignore"):
        for col in range(words.shape[1]):
            h = mix64(h ^ words[:, col]) + np.uint64(col + 1)
    return h


def reduce61(x: np.ndarray) -> np.ndarray:
    """``x mod P61`` for uint64 ``x``."""
    x = (x & _P61) + (x >> _U61)
    return np.where(x >= _P61, x - _P61, x)


def _mulmod61_raw(a: np.ndarray, x: np.ndarray) -> np.ndarray:
    # below 2**64 and congruent to a * x mod P61; 2**62 == 2 and 2**61 == 1 (mod P61)
    a1, a0 = a >> _U31, a & _LO31
    x1, x0 = x >> _U31, x & _LO31
    mid = a1 * x0
    mid += a0 * x1
    s = a1 * x1
    s <<= np.uint64(1)
    s += mid >> _U30
    mid &= _LO30
    mid <<= _U31
    s += mid
    s += a0 * x0
    return s


def mulmod61(a: np.ndarray, x: np.ndarray) -> np.ndarray:
    """``a * x mod P61`` for ``a, x < P61`` without 128-bit arithmetic."""
    s = _mulmod61_raw(np.asarray(a, dtype=np.uint64), np.asarray(x, dtype=np.uint64))
    return reduce61(reduce61(s))


def carter_wegman(fp: np.ndarray, a, b, m) -> np.ndarray:
    """``((a * fp + b) mod P61) mod m``, elementwise and broadcasting."""
    x = reduce61(np.asarray(fp, dtype=np.uint64))
    s = _mulmod61_raw(np.asarray(a, dtype=np.uint64), x)
    s = (s & _P61) + (s >> _U61)
    s += np.asarray(b, dtype=np.uint64)
    s = (s & _P61) + (s >> _U61)
    s = np.where(s >= _P61, s - _P61, s)
    return (s % np.asarray(m, dtype=np.uint64)).astype(np.int64)


def cw_params(keys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-member ``(a, b)`` with ``1 <= a < P61`` and ``0 <= b < P61``."""
    keys = np.asarray(keys, dtype=np.uint64)
    with np.errstate(over="ignore"):
        a = mix64(keys ^ np.uint64(0xA5A5A5A5A5A5A5A5)) % np.uint64(P61 - 1) + np.uint64(1)
        b = mix64(keys + np.uint64(0x3C6EF372FE94F82B)) % _P61
    return a, b


def pairwise31_params(keys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-member ``(a, b)`` of the mod-``P31`` affine family."""
    keys = np.asarray(keys, dtype=np.uint64)
    with np.errstate(over="ignore"):
        a = mix64(keys ^ np.uint64(0x5851F42D4C957F2D)) % np.uint64(P31 - 1) + np.uint64(1)
        b = mix64(keys + np.uint64(0x14057B7EF767814F)) % np.uint64(P31)
    return a, b


def affine31(x: np.ndarray, a: np.ndarray, b: np.ndarray, m) -> np.ndarray:
    """``((a x + b) mod P31) mod m`` for ``x < 2**31``."""
    y = (a * np.asarray(x, dtype=np.uint64) + b) % np.uint64(P31)
    return (y % np.asarray(m, dtype=np.uint64)).astype(np.int64)


def pairwise31(x: np.ndarray, keys: np.ndarray, m) -> np.ndarray:
    """Pairwise-independent map ``((a x + b) mod P31) mod m`` for ``x < 2**31``.

    ``keys`` selects the family member elementwise.
    """
    a, b = pairwise31_params(keys)
    return affine31(x, a, b, m)


@dataclass(frozen=True)
class UniversalHash:
    """One member of the multiply-mod-prime family from byte keys to [modulus]."""

    a: int
    b: int
    modulus: int

    @classmethod
    def sample(cls, seed: int, modulus: int, *path: int) -> "UniversalHash":
        a, b = cw_params(np.array([derive(seed, *path)], dtype=np.uint64))
        return cls(int(a[0]), int(b[0]), modulus)

    def __call__(self, keys) -> np.ndarray:
        return self.hash_fingerprints(fingerprint(keys))

    def hash_fingerprints(self, fp: np.ndarray) -> np.ndarray:
        return carter_wegman(fp, np.uint64(self.a), np.uint64(self.b), self.modulus)
