"""Points, metrics, datasets, planted instances and the dataset file format.

Hamming points are bit-packed into little-endian uint64 words (bit ``b`` of a
point lives in word ``b // 64`` at position ``b % 64``); padding bits are zero.
Euclidean and Manhattan points are float64 vectors.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._rng import Stream

__all__ = [
    "Metric",
    "Dataset",
    "PlantedSpec",
    "FormatError",
    "distance",
    "distances",
    "pack_bits",
    "unpack_bits",
    "generate_planted",
    "perturbed_query",
    "save_dataset",
    "load_dataset",
    "save_query",
    "load_query",
]

DATASET_MAGIC = b"ANNI"
QUERY_MAGIC = b"ANNQ"
FORMAT_VERSION = 1
MAX_RESAMPLES = 1000

_DATASET_HEADER = struct.Struct("<4sHBBQIQ")
_QUERY_HEADER = struct.Struct("<4sHBBIQQ")


class Metric(enum.IntEnum):
    HAMMING = 0
    EUCLIDEAN = 1
    MANHATTAN = 2

    @classmethod
    def parse(cls, value: "Metric | str | int") -> "Metric":
        if isinstance(value, str):
            try:
                return cls[value.upper()]
            except KeyError:
                raise ValueError(f"unknown metric {value!r}") from None
        return cls(value)

    @property
    def label(self) -> str:
        return self.name.lower()


class FormatError(ValueError):
    """Malformed or truncated file; ``offset`` is the byte where it went wrong."""

    def __init__(self, message: str, offset: int) -> None:
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


def words_for(dim: int) -> int:
    return (dim + 63) // 64


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """Pack a ``(n, d)`` 0/1 array into ``(n, ceil(d/64))`` uint64 words."""
    bits = np.atleast_2d(np.asarray(bits, dtype=np.uint8))
    n, d = bits.shape
    nw = words_for(d)
    padded = np.zeros((n, nw * 64), dtype=np.uint8)
    padded[:, :d] = bits
    packed = np.packbits(padded, axis=1, bitorder="little")
    return np.ascontiguousarray(packed).view("<u8").astype(np.uint64).reshape(n, nw)


def unpack_bits(words: np.ndarray, dim: int) -> np.ndarray:
    words = np.atleast_2d(np.asarray(words, dtype="<u8"))
    as_bytes = np.ascontiguousarray(words).view(np.uint8)
    return np.unpackbits(as_bytes, axis=1, bitorder="little")[:, :dim]


def _popcount(words: np.ndarray) -> np.ndarray:
    return np.bitwise_count(words).sum(axis=-1).astype(np.int64)


@dataclass(frozen=True, eq=False)
class Dataset:
    """An ordered, immutable point list ``x_0 .. x_{n-1}``.

    ``points`` is ``(n, ceil(d/64))`` uint64 for Hamming data and ``(n, d)``
    float64 otherwise.
    """

    points: np.ndarray
    dim: int
    metric: Metric
    seed: int = 0

    def __post_init__(self) -> None:
        metric = Metric.parse(self.metric)
        object.__setattr__(self, "metric", metric)
        if self.dim <= 0:
            raise ValueError("dimension must be positive")
        dtype = np.uint64 if metric is Metric.HAMMING else np.float64
        width = words_for(self.dim) if metric is Metric.HAMMING else self.dim
        pts = np.ascontiguousarray(self.points, dtype=dtype)
        if pts.ndim != 2 or pts.shape[1] != width:
            raise ValueError(f"points must have shape (n, {width}), got {pts.shape}")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, j: int) -> np.ndarray:
        return self.points[j]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.dim == other.dim
            and self.metric == other.metric
            and self.seed == other.seed
            and self.points.shape == other.points.shape
            and self.points.tobytes() == other.points.tobytes()
        )

    @property
    def nbytes(self) -> int:
        return int(self.points.nbytes)

    def check_point(self, q: np.ndarray) -> np.ndarray:
        q = np.asarray(q, dtype=self.points.dtype)
        if q.shape != self.points.shape[1:]:
            raise ValueError(f"query has shape {q.shape}, dataset points have {self.points.shape[1:]}")
        return q


def _check_pair(metric: Metric, x: np.ndarray, y: np.ndarray) -> None:
    if x.shape[-1] != y.shape[-1]:
        raise ValueError(f"dimension mismatch: {x.shape[-1]} vs {y.shape[-1]}")


def distance(metric: Metric | str, x, y) -> float:
    """Distance between two points under ``metric``.

    Hamming points are packed word arrays (see :func:`pack_bits`).
    """
    metric = Metric.parse(metric)
    if metric is Metric.HAMMING:
        x = np.asarray(x, dtype=np.uint64)
        y = np.asarray(y, dtype=np.uint64)
        _check_pair(metric, x, y)
        return float(_popcount(x ^ y))
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    _check_pair(metric, x, y)
    diff = x - y
    if metric is Metric.EUCLIDEAN:
        return float(np.sqrt(np.dot(diff, diff)))
    return float(np.abs(diff).sum())


def distances(metric: Metric | str, points: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Distances from ``q`` to every row of ``points``."""
    metric = Metric.parse(metric)
    points = np.atleast_2d(points)
    _check_pair(metric, points, np.asarray(q))
    if metric is Metric.HAMMING:
        return _popcount(points ^ np.asarray(q, dtype=np.uint64)).astype(np.float64)
    diff = points - np.asarray(q, dtype=np.float64)
    if metric is Metric.EUCLIDEAN:
        return np.sqrt(np.einsum("ij,ij->i", diff, diff))
    return np.abs(diff).sum(axis=1)


@dataclass(frozen=True)
class PlantedSpec:
    n: int
    d: int
    metric: Metric | str
    r: float
    c: float
    seed: int = 0

    def validate(self) -> None:
        metric = Metric.parse(self.metric)
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if self.d < 1:
            raise ValueError("d must be at least 1")
        if not self.c > 1:
            raise ValueError(f"approximation factor c must exceed 1, got {self.c}")
        if not self.r > 0:
            raise ValueError(f"radius r must be positive, got {self.r}")
        if metric is Metric.HAMMING:
            if self.r != int(self.r):
                raise ValueError("hamming radius must be an integer")
            if self.c * self.r >= self.d:
                raise ValueError(f"infeasible hamming geometry: c*r = {self.c * self.r} >= d = {self.d}")


def generate_planted(spec: PlantedSpec) -> tuple[Dataset, np.ndarray, int]:
    """Build a dataset with exactly one point within ``r`` of the query.

    Every other point lies strictly farther than ``c * r``.  Returns
    ``(dataset, query, planted_index)``; output depends only on ``spec``.

    Hamming: ``q`` is uniform, the planted point flips exactly ``r`` random
    bits of ``q`` and far points are uniform vectors resampled until they are
    beyond ``c * r``.  Real metrics: ``q`` is standard normal, the planted
    point sits at distance ``r * u`` (``u`` uniform in [0.5, 1]) and far points
    sit at distance ``2 c r (1 + v / 4)`` (``v`` uniform in [-1, 1]) along a
    Gaussian direction (Euclidean) or a Laplace direction normalised in l1
    (Manhattan).
    """
    spec.validate()
    metric = Metric.parse(spec.metric)
    n, d, seed = spec.n, spec.d, spec.seed
    placement = Stream(seed, 1)
    planted = int(placement.integers(n, 1)[0])
    if metric is Metric.HAMMING:
        points, q = _planted_hamming(n, d, int(spec.r), spec.c, seed, planted)
    else:
        points, q = _planted_real(metric, n, d, spec.r, spec.c, seed, planted)
    ds = Dataset(points, d, metric, seed)
    return ds, q, planted


def _planted_hamming(n, d, r, c, seed, planted):
    s = Stream(seed, 2)
    q_bits = (s.words(d) >> np.uint64(63)).astype(np.uint8)
    bits = (s.words(n * d) >> np.uint64(63)).astype(np.uint8).reshape(n, d)
    near = q_bits.copy()
    near[s.choice(d, r)] ^= 1
    bits[planted] = near
    limit = c * r
    others = np.ones(n, dtype=bool)
    others[planted] = False
    for _ in range(MAX_RESAMPLES):
        dist = (bits != q_bits).sum(axis=1)
        bad = np.flatnonzero(others & (dist <= limit))
        if bad.size == 0:
            return pack_bits(bits), pack_bits(q_bits)[0]
        fresh = (s.words(bad.size * d) >> np.uint64(63)).astype(np.uint8)
        bits[bad] = fresh.reshape(bad.size, d)
    raise ValueError(f"could not place far points beyond c*r = {limit} in {MAX_RESAMPLES} resamples")


def _direction(metric: Metric, s: Stream, n: int, d: int) -> np.ndarray:
    if metric is Metric.EUCLIDEAN:
        v = s.normal(n * d).reshape(n, d)
        norms = np.linalg.norm(v, axis=1, keepdims=True)
    else:
        u = s.uniform(n * d).reshape(n, d) - 0.5
        v = -np.sign(u) * np.log1p(-2.0 * np.abs(u))
        norms = np.abs(v).sum(axis=1, keepdims=True)
    return v / np.where(norms > 0, norms, 1.0)


def _planted_real(metric, n, d, r, c, seed, planted):
    s = Stream(seed, 3)
    q = s.normal(d)
    radius = 2.0 * c * r * (1.0 + (2.0 * s.uniform(n) - 1.0) / 4.0)
    radius[planted] = r * (0.5 + 0.5 * s.uniform(1)[0])
    points = q + _direction(metric, s, n, d) * radius[:, None]
    dist = distances(metric, points, q)
    # rounding can only matter at the boundaries, which the radii avoid by a wide margin
    far = np.delete(dist, planted)
    if dist[planted] > r or (far.size and far.min() <= c * r):
        raise ValueError("planted geometry violated after rounding")
    return points, q


def perturbed_query(ds: Dataset, r: float, seed: int, *path: int) -> tuple[np.ndarray, int]:
    """A query near a random dataset point; returns ``(query, source_index)``.

    Hamming flips exactly ``r`` bits of the source, real metrics move it by
    ``r * u`` with ``u`` uniform in [0.5, 1].  Other points may also end up
    within ``c * r``; any of them is a correct answer.
    """
    s = Stream(seed, 4, *path)
    j = int(s.integers(ds.n, 1)[0])
    if ds.metric is Metric.HAMMING:
        if not 0 <= r <= ds.dim or r != int(r):
            raise ValueError(f"hamming radius must be an integer in [0, {ds.dim}], got {r}")
        bits = unpack_bits(ds.points[j:j + 1], ds.dim)
        bits[0, s.choice(ds.dim, int(r))] ^= 1
        return pack_bits(bits)[0], j
    step = _direction(ds.metric, s, 1, ds.dim)[0] * r * (0.5 + 0.5 * s.uniform(1)[0])
    return ds.points[j] + step, j


def _dataset_header(ds: Dataset) -> bytes:
    return _DATASET_HEADER.pack(DATASET_MAGIC, FORMAT_VERSION, int(ds.metric), 0, ds.n, ds.dim, ds.seed)


def dataset_bytes(ds: Dataset) -> bytes:
    return _dataset_header(ds) + ds.points.astype(ds.points.dtype.newbyteorder("<")).tobytes()


def save_dataset(ds: Dataset, path) -> None:
    Path(path).write_bytes(dataset_bytes(ds))


def _payload(metric: Metric, count: int, dim: int) -> tuple[np.dtype, int]:
    if metric is Metric.HAMMING:
        return np.dtype("<u8"), count * words_for(dim)
    return np.dtype("<f8"), count * dim


def _read_header(data: bytes, st: struct.Struct, magic: bytes) -> tuple:
    if len(data) < 4:
        raise FormatError("file too short for magic bytes", len(data))
    if data[:4] != magic:
        raise FormatError(f"bad magic {data[:4]!r}, expected {magic!r}", 0)
    if len(data) < st.size:
        raise FormatError("truncated header", len(data))
    fields = st.unpack_from(data)
    if fields[1] != FORMAT_VERSION:
        raise FormatError(f"unsupported version {fields[1]}", 4)
    if fields[2] not in (0, 1, 2):
        raise FormatError(f"unknown metric code {fields[2]}", 6)
    if fields[3] != 0:
        raise FormatError("reserved byte must be zero", 7)
    return fields


def parse_dataset(data: bytes) -> Dataset:
    _, _, metric, _, n, d, seed = _read_header(data, _DATASET_HEADER, DATASET_MAGIC)
    if d == 0:
        raise FormatError("dimension must be positive", 16)
    metric = Metric(metric)
    dtype, count = _payload(metric, n, d)
    start = _DATASET_HEADER.size
    expected = start + count * dtype.itemsize
    if len(data) < expected:
        raise FormatError(f"truncated payload: need {expected} bytes, have {len(data)}", len(data))
    if len(data) > expected:
        raise FormatError("trailing bytes after payload", expected)
    flat = np.frombuffer(data, dtype=dtype, count=count, offset=start)
    width = words_for(d) if metric is Metric.HAMMING else d
    return Dataset(flat.reshape(n, width), d, metric, seed)


def load_dataset(path) -> Dataset:
    return parse_dataset(Path(path).read_bytes())


def query_bytes(metric: Metric | str, q: np.ndarray, dim: int, planted_index: int, seed: int = 0) -> bytes:
    metric = Metric.parse(metric)
    dtype, count = _payload(metric, 1, dim)
    payload = np.asarray(q).astype(dtype).reshape(-1)
    if payload.size != count:
        raise ValueError(f"query has {payload.size} payload values, expected {count}")
    header = _QUERY_HEADER.pack(QUERY_MAGIC, FORMAT_VERSION, int(metric), 0, dim, planted_index, seed)
    return header + payload.tobytes()


def save_query(path, metric, q, dim: int, planted_index: int, seed: int = 0) -> None:
    """Write the query sidecar: ``ANNQ`` header, then the query point payload."""
    Path(path).write_bytes(query_bytes(metric, q, dim, planted_index, seed))


def load_query(path) -> tuple[np.ndarray, int, Metric, int]:
    """Return ``(query, planted_index, metric, seed)``."""
    data = Path(path).read_bytes()
    _, _, metric, _, d, planted, seed = _read_header(data, _QUERY_HEADER, QUERY_MAGIC)
    metric = Metric(metric)
    dtype, count = _payload(metric, 1, d)
    start = _QUERY_HEADER.size
    expected = start + count * dtype.itemsize
    if len(data) != expected:
        raise FormatError(f"query payload must be {expected - start} bytes", min(len(data), expected))
    q = np.frombuffer(data, dtype=dtype, count=count, offset=start).copy()
    return q, planted, metric, seed
