"""Locality-sensitive hash families, amplification and the repetition planner.

An amplified hash concatenates ``k`` base hashes.  Its value on a point is a
canonical byte key: bit-sampling parts are single bits packed LSB-first into
``ceil(k / 8)`` bytes, p-stable parts are little-endian int32 words.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, stats

from ._rng import Stream
from .core import Dataset, Metric

__all__ = [
    "SensitivityProfile",
    "PlannerError",
    "BitSampling",
    "PStableEuclidean",
    "bit_sampling_family",
    "pstable_euclidean_family",
    "pstable_collision_probability",
    "concat_length",
    "repetitions_for",
    "repetition_count",
    "AmplifiedHash",
    "HashBattery",
    "battery_build",
    "battery_eval",
]

_ROUND = 1e-9


class PlannerError(ValueError):
    """The requested parameters cannot be planned (e.g. ``p1 ** k`` underflows)."""


@dataclass(frozen=True)
class SensitivityProfile:
    p1: float
    p2: float
    r: float
    cr: float

    def __post_init__(self) -> None:
        if not 0 < self.p1 <= 1:
            raise ValueError(f"p1 must lie in (0, 1], got {self.p1}")
        if not 0 < self.p2 < 1:
            raise ValueError(f"p2 must lie in (0, 1), got {self.p2}")
        if not self.p1 > self.p2:
            raise ValueError("p1 must exceed p2")
        if not self.cr > self.r > 0:
            raise ValueError("need cr > r > 0")

    @property
    def c(self) -> float:
        return self.cr / self.r

    @property
    def rho(self) -> float:
        return math.log(self.p1) / math.log(self.p2)


class BitSampling:
    """Bit sampling for Hamming space: each base hash reads one coordinate."""

    metric = Metric.HAMMING

    def __init__(self, d: int, r: float, c: float) -> None:
        if not (d > 0 and r > 0 and c > 1):
            raise ValueError("need d > 0, r > 0 and c > 1")
        if c * r >= d:
            raise ValueError(f"c*r = {c * r} must be below d = {d} (p2 would be <= 0)")
        self.d, self.r, self.c = d, r, c
        self.profile = SensitivityProfile(1 - r / d, 1 - c * r / d, r, c * r)

    def __repr__(self) -> str:
        return f"BitSampling(d={self.d}, r={self.r}, c={self.c})"

    def key_width(self, k: int) -> int:
        return (k + 7) // 8

    def sample(self, stream: Stream, k: int) -> dict[str, np.ndarray]:
        dtype = np.uint16 if self.d <= 1 << 16 else np.uint32
        return {"coords": stream.integers(self.d, k).astype(dtype)}

    def collision_probability(self, dist: float) -> float:
        return 1 - dist / self.d

    def parts(self, params: dict[str, np.ndarray], points: np.ndarray) -> np.ndarray:
        """Raw part outputs, ``(m, k)`` uint8 bits."""
        coords = params["coords"].astype(np.int64)
        words = np.atleast_2d(points)[:, coords >> 6]
        return ((words >> (coords & 63).astype(np.uint64)) & np.uint64(1)).astype(np.uint8)

    def keys(self, params: dict[str, np.ndarray], points: np.ndarray) -> np.ndarray:
        return np.packbits(self.parts(params, points), axis=1, bitorder="little")


def pstable_collision_probability(dist: float, w: float) -> float:
    """Collision probability of ``floor((<a, x> + b) / w)`` at distance ``dist``.

    Integrates ``(1/u) f(t/u) (1 - t/w)`` over ``t`` in ``[0, w]`` where ``f`` is
    the density of ``|N(0, 1)|`` and ``u = dist``.
    """
    if dist < 0 or w <= 0:
        raise ValueError("need dist >= 0 and w > 0")
    if dist == 0:
        return 1.0
    u = dist

    def integrand(t: float) -> float:
        return 2.0 * stats.norm.pdf(t / u) / u * (1.0 - t / w)

    val, _ = integrate.quad(integrand, 0.0, w, epsabs=1e-9, epsrel=1e-12, limit=200)
    return float(val)


class PStableEuclidean:
    """Gaussian projections with bucket width ``w`` for Euclidean space."""

    metric = Metric.EUCLIDEAN

    def __init__(self, d: int, r: float, c: float, w: float = 4.0) -> None:
        if not (d > 0 and r > 0 and c > 1):
            raise ValueError("need d > 0, r > 0 and c > 1")
        if not w > 0:
            raise ValueError("bucket width w must be positive")
        self.d, self.r, self.c, self.w = d, r, c, w
        p1 = pstable_collision_probability(r, w)
        p2 = pstable_collision_probability(c * r, w)
        self.profile = SensitivityProfile(p1, p2, r, c * r)

    def __repr__(self) -> str:
        return f"PStableEuclidean(d={self.d}, r={self.r}, c={self.c}, w={self.w})"

    def key_width(self, k: int) -> int:
        return 4 * k

    def sample(self, stream: Stream, k: int) -> dict[str, np.ndarray]:
        a = stream.normal(k * self.d).reshape(k, self.d)
        b = stream.uniform(k) * self.w
        return {"a": a, "b": b}

    def collision_probability(self, dist: float) -> float:
        return pstable_collision_probability(dist, self.w)

    def parts(self, params: dict[str, np.ndarray], points: np.ndarray) -> np.ndarray:
        proj = np.atleast_2d(points) @ params["a"].T + params["b"]
        return np.floor(proj / self.w).astype("<i4")

    def keys(self, params: dict[str, np.ndarray], points: np.ndarray) -> np.ndarray:
        parts = np.ascontiguousarray(self.parts(params, points))
        return parts.view(np.uint8).reshape(parts.shape[0], -1)


def bit_sampling_family(d: int, r: float, c: float) -> BitSampling:
    return BitSampling(d, r, c)


def pstable_euclidean_family(d: int, r: float, c: float, w: float = 4.0) -> PStableEuclidean:
    return PStableEuclidean(d, r, c, w)


def concat_length(n: int, p2: float) -> int:
    """``ceil(log_{1/p2} n)``: far pairs then collide with probability <= 1/n."""
    if n < 2:
        raise ValueError("n must be at least 2")
    if not 0 < p2 < 1:
        raise ValueError(f"p2 must lie in (0, 1), got {p2}")
    return max(1, math.ceil(math.log(n) / math.log(1 / p2) - _ROUND))


def repetitions_for(p1k: float, target_miss: float = 0.1, doubled: bool = False) -> int:
    """Smallest ``R`` with ``(1 - p1k) ** R <= target_miss``, times two if ``doubled``."""
    if not 0 < target_miss < 1:
        raise ValueError("target_miss must lie in (0, 1)")
    if p1k <= 0:
        raise PlannerError("p1**k underflows to zero; no finite repetition count reaches the target")
    if p1k >= 1:
        reps = 1
    else:
        reps = max(1, math.ceil(math.log(target_miss) / math.log1p(-p1k) - _ROUND))
    return 2 * reps if doubled else reps


def repetition_count(n: int, profile: SensitivityProfile, target_miss: float = 0.1, doubled: bool = False) -> int:
    k = concat_length(max(n, 2), profile.p2)
    return repetitions_for(profile.p1**k, target_miss, doubled)


@dataclass(frozen=True)
class AmplifiedHash:
    """One concatenated hash ``l_i``; calling it yields ``(m, width)`` key bytes."""

    family: object
    params: dict

    @property
    def k(self) -> int:
        return len(next(iter(self.params.values())))

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return self.family.keys(self.params, points)

    def key(self, x: np.ndarray) -> bytes:
        return self(np.asarray(x)[None, :])[0].tobytes()


@dataclass(eq=False)
class HashBattery:
    """``R`` independently seeded amplified hashes sharing one family."""

    family: object
    k: int
    seed: int
    hashes: list[AmplifiedHash] = field(default_factory=list)

    @property
    def R(self) -> int:
        return len(self.hashes)

    @property
    def profile(self) -> SensitivityProfile:
        return self.family.profile

    @property
    def key_width(self) -> int:
        return self.family.key_width(self.k)

    def __len__(self) -> int:
        return self.R

    def __getitem__(self, i: int) -> AmplifiedHash:
        if not 0 <= i < self.R:
            raise IndexError(f"hash index {i} outside [0, {self.R})")
        return self.hashes[i]

    @property
    def nbytes(self) -> int:
        return sum(int(a.nbytes) for h in self.hashes for a in h.params.values())


def battery_build(n: int, family, seed: int, R: int | None = None, doubled: bool = False,
                  target_miss: float = 0.1) -> HashBattery:
    """Plan ``k`` and ``R`` for ``n`` points and sample the hashes.

    Hash ``i`` is drawn from its own stream ``(seed, i)``, so a battery's first
    hashes do not depend on how many are drawn.
    """
    k = concat_length(max(n, 2), family.profile.p2)
    if R is None:
        R = repetitions_for(family.profile.p1**k, target_miss, doubled)
    if R < 1:
        raise ValueError("R must be at least 1")
    hashes = [AmplifiedHash(family, family.sample(Stream(seed, 10, i), k)) for i in range(R)]
    return HashBattery(family, k, seed, hashes)


def battery_eval(battery: HashBattery, i: int, x: np.ndarray) -> bytes:
    """Key of point ``x`` under hash ``i`` (0-based)."""
    return battery[i].key(x)


def dataset_keys(battery: HashBattery, i: int, ds: Dataset, idx: np.ndarray | None = None) -> np.ndarray:
    pts = ds.points if idx is None else ds.points[idx]
    return battery[i](pts)
