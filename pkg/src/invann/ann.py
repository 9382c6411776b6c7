"""Approximate near neighbour indexes over a :class:`~invann.core.Dataset`.

:class:`ClassicIndex` keeps a reverse lookup table per amplified hash.
:class:`InvertedIndex` keeps no tables at all: it stores the dataset, the
hashes and an :class:`~invann.all_inversion.AllInverter` over the functions
``j -> l_i(x_j)``, and recovers each bucket by inverting that function.

Both answer a query the same way: walk the hashes in order, distance-check the
bucket contents and return the first point within ``c * r``.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .all_inversion import AllInverter, InverterConfig, InvertStats, build_all_inverter, invert_all
from .core import Dataset, Metric, distances
from .inversion import index_dtype
from .lsh import BitSampling, HashBattery, PStableEuclidean, battery_build

__all__ = [
    "ANN_INVERTER_CONFIG",
    "QueryResult",
    "DatasetKeys",
    "ClassicIndex",
    "InvertedIndex",
    "family_for",
    "build_classic",
    "query_classic",
    "build_inverted",
    "query_inverted",
    "memory_footprint",
]

# Buckets of an amplified hash hold O(1) points in expectation, so the index
# keeps half a subset per unit of kappa * ln n and levels up to kappa = 4; larger
# buckets are recovered by the exact scan.
ANN_INVERTER_CONFIG = InverterConfig(sets_per_unit=0.5, max_kappa=4)


def family_for(ds: Dataset, r: float, c: float, w: float = 4.0):
    """Default family for the dataset's metric."""
    if ds.metric is Metric.HAMMING:
        return BitSampling(ds.dim, r, c)
    if ds.metric is Metric.EUCLIDEAN:
        return PStableEuclidean(ds.dim, r, c, w)
    raise ValueError(f"no LSH family available for {ds.metric.label} data")


def _check_family(ds: Dataset, family) -> None:
    if family.metric is not ds.metric:
        raise ValueError(f"{family!r} hashes {family.metric.label} points, dataset is {ds.metric.label}")
    if family.d != ds.dim:
        raise ValueError(f"family dimension {family.d} differs from dataset dimension {ds.dim}")


@dataclass
class QueryResult:
    found: tuple[int, float] | None = None
    candidates_examined: int = 0
    inverter_f_evals: int = 0
    hashes_probed: int = 0
    wall_time: float = 0.0


@dataclass(frozen=True)
class DatasetKeys:
    """``j -> l(x_j)``: one amplified hash read through the dataset order."""

    ds: Dataset
    hash: object

    @property
    def domain_size(self) -> int:
        return self.ds.n

    @property
    def key_width(self) -> int:
        return self.hash.family.key_width(self.hash.k)

    def keys(self, idx: np.ndarray) -> np.ndarray:
        return self.hash(self.ds.points[np.asarray(idx, dtype=np.int64)])


def _as_strings(keys: np.ndarray) -> np.ndarray:
    keys = np.ascontiguousarray(keys, dtype=np.uint8)
    return keys.view(f"S{keys.shape[1]}").ravel()


@dataclass(eq=False)
class ReverseTable:
    """Sorted distinct keys with the dataset indices of each key stored contiguously."""

    keys: np.ndarray
    offsets: np.ndarray
    members: np.ndarray

    @classmethod
    def build(cls, keys: np.ndarray) -> "ReverseTable":
        n = keys.shape[0]
        uniq, inverse = np.unique(_as_strings(keys), return_inverse=True)
        order = np.argsort(inverse, kind="stable")
        counts = np.bincount(inverse, minlength=uniq.size)
        offsets = np.zeros(uniq.size + 1, dtype=np.int64)
        np.cumsum(counts, out=offsets[1:])
        return cls(uniq, offsets.astype(index_dtype(n + 1)), order.astype(index_dtype(n)))

    def lookup(self, key: np.ndarray) -> np.ndarray:
        probe = _as_strings(np.asarray(key, dtype=np.uint8)[None, :])[0]
        pos = int(np.searchsorted(self.keys, probe))
        if pos == self.keys.size or self.keys[pos] != probe:
            return np.empty(0, dtype=np.int64)
        return self.members[int(self.offsets[pos]):int(self.offsets[pos + 1])].astype(np.int64)

    @property
    def nbytes(self) -> int:
        return int(self.keys.nbytes + self.offsets.nbytes + self.members.nbytes)


@dataclass(eq=False)
class ClassicIndex:
    ds: Dataset
    battery: HashBattery
    tables: list[ReverseTable] = field(default_factory=list)

    @property
    def cr(self) -> float:
        return self.battery.profile.cr


@dataclass(eq=False)
class InvertedIndex:
    ds: Dataset
    battery: HashBattery
    inverter: AllInverter
    s: float

    @property
    def cr(self) -> float:
        return self.battery.profile.cr

    @property
    def sigma(self) -> float:
        return self.inverter.sigma


def build_classic(ds: Dataset, family, seed: int = 0, R: int | None = None,
                  target_miss: float = 0.1) -> ClassicIndex:
    """Plan the hashes for ``ds.n`` points and fill one reverse table per hash."""
    _check_family(ds, family)
    battery = battery_build(ds.n, family, seed, R=R, target_miss=target_miss)
    tables = [ReverseTable.build(battery[i](ds.points)) for i in range(battery.R)]
    return ClassicIndex(ds, battery, tables)


def _first_close(ds: Dataset, q: np.ndarray, cand: np.ndarray, cr: float) -> tuple[int, float] | None:
    if cand.size == 0:
        return None
    d = distances(ds.metric, ds.points[cand], q)
    close = np.flatnonzero(d <= cr)
    if close.size == 0:
        return None
    return int(cand[close[0]]), float(d[close[0]])


def query_classic(index: ClassicIndex, q) -> QueryResult:
    t0 = time.perf_counter()
    q = index.ds.check_point(q)
    res = QueryResult()
    for i, table in enumerate(index.tables):
        res.hashes_probed += 1
        cand = table.lookup(index.battery[i](q[None, :])[0])
        res.candidates_examined += cand.size
        hit = _first_close(index.ds, q, cand, index.cr)
        if hit is not None:
            res.found = hit
            break
    res.wall_time = time.perf_counter() - t0
    return res


def space_factor(n: int, s: float) -> float:
    """``sigma = ceil(n ** s)`` clamped to ``[1, n]``."""
    return float(min(n, max(1, math.ceil(n**s - 1e-9))))


def build_inverted(ds: Dataset, family, s: float, seed: int = 0, config: InverterConfig = ANN_INVERTER_CONFIG,
                   R: int | None = None, target_miss: float = 0.1) -> InvertedIndex:
    """Hashes with doubled ``R`` plus an all-function inverter with ``sigma = n ** s``."""
    _check_family(ds, family)
    rho = family.profile.rho
    if not 0 < s < rho:
        raise ValueError(f"space parameter s must lie in (0, rho) = (0, {rho:.5f}), got {s}")
    if ds.n < 2:
        raise ValueError("the inverted index needs at least two points")
    battery = battery_build(ds.n, family, seed, R=R, doubled=R is None, target_miss=target_miss)
    functions = [DatasetKeys(ds, battery[i]) for i in range(battery.R)]
    inverter = build_all_inverter(functions, ds.n, space_factor(ds.n, s), seed ^ 0x1A7E, config)
    return InvertedIndex(ds, battery, inverter, s)


def query_inverted(index: InvertedIndex, q, debug: bool = False) -> QueryResult:
    t0 = time.perf_counter()
    q = index.ds.check_point(q)
    res = QueryResult()
    for i in range(index.battery.R):
        res.hashes_probed += 1
        key = index.battery[i](q[None, :])[0]
        stats = InvertStats()
        cand = invert_all(index.inverter, i, key, stats=stats)
        res.inverter_f_evals += stats.f_evals
        res.candidates_examined += cand.size
        if debug and cand.size:
            assert (index.battery[i](index.ds.points[cand]) == key).all(), "inverter returned a non-colliding point"
        hit = _first_close(index.ds, q, cand, index.cr)
        if hit is not None:
            res.found = hit
            break
    res.wall_time = time.perf_counter() - t0
    return res


def memory_footprint(index: ClassicIndex | InvertedIndex) -> dict[str, int]:
    """Bytes owned by the index, by section, plus ``total``."""
    sections = {"dataset": index.ds.nbytes, "battery": index.battery.nbytes}
    if isinstance(index, ClassicIndex):
        sections["tables"] = sum(t.nbytes for t in index.tables)
    else:
        sections["inverter"] = index.inverter.nbytes
    sections["total"] = sum(sections.values())
    return sections
