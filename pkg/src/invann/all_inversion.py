"""Recover the full preimage of any of ``R`` functions ``f_i: [N] -> D``.

For each preimage-size guess ``kappa = 2, 4, ...`` a level holds about
``A * kappa * ceil(ln N)`` random subsets of ``[N]``, each keeping every index
with probability ``1 / kappa``.  For function ``i`` and subset ``S`` the
sub-function ``f_{i,S}(x) = h_{i,S}(f_i(S[x]))`` is inverted by chain tables
(:mod:`invann.inversion`), with ``h_{i,S}`` a Carter-Wegman hash of the key
fingerprint.  A query asks every subset of a level for an inverse, keeps the
hits whose key really equals the target and moves to the next level only while
at least ``kappa`` distinct elements have been found.  Past the last level it
scans all of ``[N]``.

The subsets are shared by all ``R`` functions; hashes and chain tables are
drawn per function.  Keeping one copy of the subsets is what holds the space
to ``O~(N + N R / sigma)`` instead of ``O~(N R)``.
"""

from __future__ import annotations

import io
import logging
import math
import struct
from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np

from ._rng import GOLDEN, derive, mix64
from .core import FormatError
from .hashing import P31, as_key_matrix, carter_wegman, cw_params, fingerprint
from .inversion import ChainLayout, EvalCounter, chain_shape, index_dtype

__all__ = [
    "KeyFunction",
    "TableKeys",
    "RandomKeys",
    "InverterConfig",
    "SampleLevel",
    "AllInverter",
    "InvertStats",
    "build_all_inverter",
    "invert_all",
    "brute_preimage",
    "kappa_levels",
    "plan_levels",
    "projected_nbytes",
    "save_inverter",
    "load_inverter",
    "inverter_bytes",
]

log = logging.getLogger(__name__)

INVERTER_MAGIC = b"AFIV"
INVERTER_VERSION = 1
MAX_SAMPLE_ATTEMPTS = 64
# stored entries <= SPACE_CONSTANT * (N + N R / sigma) * (1 + log2(N))**3
SPACE_CONSTANT = 4
# f-evaluations per query <= WORK_CONSTANT * sigma**3 * log2(N)**3 * (1 + |preimage|)
WORK_CONSTANT = 4
# build f-evaluations <= BUILD_CONSTANT * N * R * log2(N)**3
BUILD_CONSTANT = 4


class KeyFunction(Protocol):
    """A function from ``[domain_size]`` to fixed-width byte keys, evaluated in batches."""

    domain_size: int
    key_width: int

    def keys(self, idx: np.ndarray) -> np.ndarray:
        """``(len(idx), key_width)`` uint8 keys."""
        ...


@dataclass(frozen=True)
class TableKeys:
    """A key function given by an explicit ``(N, width)`` key matrix."""

    table: np.ndarray

    @property
    def domain_size(self) -> int:
        return self.table.shape[0]

    @property
    def key_width(self) -> int:
        return self.table.shape[1]

    def keys(self, idx: np.ndarray) -> np.ndarray:
        return self.table[np.asarray(idx, dtype=np.int64)]


@dataclass(frozen=True)
class RandomKeys:
    """Pseudorandom ``f(j) = mix(seed, j) mod codomain`` as 8-byte little-endian keys."""

    domain_size: int
    codomain: int
    seed: int = 0
    key_width: int = 8

    def values(self, idx: np.ndarray) -> np.ndarray:
        j = np.asarray(idx, dtype=np.uint64) + np.uint64(1)
        with np.errstate(over="ignore"):
            v = mix64(np.uint64(derive(self.seed)) ^ mix64(j * np.uint64(GOLDEN)))
        return v % np.uint64(self.codomain)

    def keys(self, idx: np.ndarray) -> np.ndarray:
        v = self.values(idx).astype("<u8")
        return np.ascontiguousarray(v).view(np.uint8).reshape(-1, 8)

    def key_of(self, value: int) -> bytes:
        return int(value).to_bytes(8, "little")


@dataclass(frozen=True)
class InverterConfig:
    """Tunable constants.

    ``sets_per_unit`` is ``A`` in ``ceil(A * kappa * ceil(ln N))`` subsets per
    level, ``fallback_factor`` is ``C2`` in ``kappa_max < N / (C2 log2 N)``,
    ``range_factor`` sets the modulus of each ``h_{i,S}`` to
    ``range_factor * |S|`` (expected false collisions per subset
    ``1 / range_factor``) and ``max_kappa`` optionally caps the levels further.
    """

    sets_per_unit: float = 8.0
    fallback_factor: float = 4.0
    range_factor: int = 64
    max_kappa: int | None = None
    batch_lanes: int = 1 << 16


def kappa_levels(N: int, config: InverterConfig = InverterConfig()) -> list[int]:
    """Powers of two from 2 up to ``kappa_max``; always contains 2."""
    bound = N / (config.fallback_factor * math.log2(max(N, 2)))
    levels = [2]
    while levels[-1] * 2 < bound:
        levels.append(levels[-1] * 2)
    if config.max_kappa is not None:
        levels = [k for k in levels if k <= max(config.max_kappa, 2)]
    return levels


@dataclass(eq=False)
class SampleLevel:
    """Subsets for one ``kappa``, shared across functions, plus their chain layout.

    ``samples[set_offsets[s]:set_offsets[s + 1]]`` is subset ``s`` in
    increasing order.  ``group_set`` maps each chain-table group to its subset.
    """

    kappa: int
    set_offsets: np.ndarray
    samples: np.ndarray
    layout: ChainLayout
    group_set: np.ndarray
    starts: list[np.ndarray] = field(default_factory=list)
    ends: list[np.ndarray] = field(default_factory=list)

    @property
    def n_sets(self) -> int:
        return len(self.set_offsets) - 1

    @property
    def set_sizes(self) -> np.ndarray:
        return np.diff(self.set_offsets.astype(np.int64))

    def subset(self, s: int) -> np.ndarray:
        return self.samples[int(self.set_offsets[s]):int(self.set_offsets[s + 1])]

    def shared_entries(self) -> int:
        return int(self.set_offsets.size + self.samples.size)

    def shared_nbytes(self) -> int:
        return int(self.set_offsets.nbytes + self.samples.nbytes + self.layout.nbytes + self.group_set.nbytes)

    def function_entries(self) -> int:
        return int(sum(a.size for a in self.starts) + sum(a.size for a in self.ends))

    def function_nbytes(self) -> int:
        return int(sum(a.nbytes for a in self.starts) + sum(a.nbytes for a in self.ends))


@dataclass(eq=False)
class AllInverter:
    N: int
    R: int
    sigma: float
    seed: int
    config: InverterConfig
    levels: list[SampleLevel]
    functions: Sequence[KeyFunction] | None = None
    build_evals: int = 0

    @property
    def kappa_max(self) -> int:
        return self.levels[-1].kappa if self.levels else 1

    @property
    def brute_force_threshold(self) -> int:
        """Smallest ``kappa`` answered by a full scan."""
        return 2 * self.kappa_max

    @property
    def stored_entries(self) -> int:
        return sum(lv.shared_entries() + lv.function_entries() for lv in self.levels)

    def space_bound(self) -> float:
        return SPACE_CONSTANT * (self.N + self.N * self.R / self.sigma) * (1 + math.log2(self.N)) ** 3

    def work_bound(self, preimage_size: int) -> float:
        return WORK_CONSTANT * self.sigma**3 * math.log2(max(self.N, 2)) ** 3 * (1 + preimage_size)

    def build_bound(self) -> float:
        return BUILD_CONSTANT * self.N * self.R * math.log2(max(self.N, 2)) ** 3

    def nbytes_by_part(self) -> dict[str, int]:
        return {
            "samples": sum(lv.shared_nbytes() for lv in self.levels),
            "chains": sum(lv.function_nbytes() for lv in self.levels),
        }

    @property
    def nbytes(self) -> int:
        return sum(self.nbytes_by_part().values())

    def attach(self, functions: Sequence[KeyFunction]) -> "AllInverter":
        if len(functions) != self.R:
            raise ValueError(f"expected {self.R} functions, got {len(functions)}")
        self.functions = functions
        return self


def _level_key(seed: int, kappa: int, what: int) -> int:
    return derive(seed, 0xA11, kappa, what)


def _hash_params(key: int, ids: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    with np.errstate(over="ignore"):
        return cw_params(mix64(np.uint64(key) ^ mix64((ids.astype(np.uint64) + np.uint64(1)) * np.uint64(GOLDEN))))


def _draw_subsets(N: int, kappa: int, n_sets: int, seed: int) -> list[np.ndarray] | None:
    """Bernoulli(1/kappa) subsets of [N], each redrawn until its size is in the window."""
    lo = max(1, math.ceil(N / (2 * kappa)))
    hi = 2 * N // kappa
    bits = int(math.log2(kappa))
    shift = np.uint64(64 - bits)
    j = (np.arange(N, dtype=np.uint64) + np.uint64(1)) * np.uint64(GOLDEN)
    out: list[np.ndarray] = []
    chunk = max(1, (1 << 22) // N)
    for first in range(0, n_sets, chunk):
        ids = np.arange(first, min(first + chunk, n_sets), dtype=np.uint64)
        pending = {int(s): None for s in ids}
        for attempt in range(MAX_SAMPLE_ATTEMPTS):
            todo = np.array([s for s, v in pending.items() if v is None], dtype=np.uint64)
            if todo.size == 0:
                break
            keys = np.array([derive(seed, 0x5E7, kappa, int(s), attempt) for s in todo], dtype=np.uint64)
            with np.errstate(over="ignore"):
                u = mix64(keys[:, None] ^ mix64(j[None, :]))
            member = (u >> shift) == 0
            sizes = member.sum(axis=1)
            for row, s in enumerate(todo):
                if lo <= sizes[row] <= hi:
                    pending[int(s)] = np.flatnonzero(member[row])
        if any(v is None for v in pending.values()):
            return None
        out.extend(pending[int(s)] for s in ids)
    return out


def _build_level(N: int, kappa: int, sigma: float, seed: int, config: InverterConfig) -> SampleLevel | None:
    n_sets = max(1, math.ceil(config.sets_per_unit * kappa * math.ceil(math.log(N)) - 1e-9))
    subsets = _draw_subsets(N, kappa, n_sets, seed)
    if subsets is None:
        return None
    sizes = np.array([len(s) for s in subsets], dtype=np.int64)
    if sizes.min() < 1:
        return None
    set_offsets = np.zeros(n_sets + 1, dtype=np.int64)
    np.cumsum(sizes, out=set_offsets[1:])
    samples = np.concatenate(subsets).astype(index_dtype(N))
    set_offsets = set_offsets.astype(index_dtype(int(set_offsets[-1]) + 1))
    # one chain-table group per (subset, table); shapes depend on the subset size only
    per_set = ChainLayout.from_shapes(sizes, sigma, 0)
    tables = np.array([chain_shape(int(m), sigma)[2] for m in sizes], dtype=np.int64)
    group_set = np.repeat(np.arange(n_sets, dtype=np.int64), tables)
    chains = np.diff(per_set.offsets)[group_set]
    offsets = np.zeros(group_set.size + 1, dtype=np.int64)
    np.cumsum(chains, out=offsets[1:])
    layout = ChainLayout(sizes[group_set], offsets, per_set.length[group_set], _level_key(seed, kappa, 1))
    return SampleLevel(kappa, set_offsets, samples, layout, group_set.astype(index_dtype(n_sets)))


class _LevelFunctions:
    """Evaluates ``f_{i,S}`` for lanes spread over a batch of functions at one level.

    Lane groups are global ``fi * G + g`` ids relative to ``first``.  Key
    fingerprints come either from a precomputed ``(batch, N)`` array (build) or
    from evaluating the key functions directly (query).
    """

    def __init__(self, level: SampleLevel, seed: int, range_factor: int, first: int,
                 functions: Sequence[KeyFunction] | None = None, fps: np.ndarray | None = None,
                 counter: EvalCounter | None = None) -> None:
        self.level = level
        self.G = level.layout.groups
        self.S = level.n_sets
        self.first = first
        self.functions = functions
        self.fps = fps
        self.counter = counter
        self.hash_key = _level_key(seed, level.kappa, 2)
        self.modulus = np.minimum(level.set_sizes * range_factor, P31)
        self.set_start = level.set_offsets.astype(np.int64)
        self._ab = None
        if fps is not None:
            ids = (np.arange(len(fps) * self.S, dtype=np.int64)) + first * self.S
            self._ab = _hash_params(self.hash_key, ids)

    def split(self, groups: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        fi, g = np.divmod(groups, self.G)
        return fi, self.level.group_set[g].astype(np.int64)

    def set_hash(self, fi: np.ndarray, sets: np.ndarray, fp: np.ndarray) -> np.ndarray:
        if self._ab is not None:
            local = fi * self.S + sets
            a, b = self._ab[0][local], self._ab[1][local]
        else:
            a, b = _hash_params(self.hash_key, (fi + self.first) * self.S + sets)
        return carter_wegman(fp, a, b, self.modulus[sets])

    def domain_index(self, groups: np.ndarray, xs: np.ndarray) -> np.ndarray:
        _, sets = self.split(groups)
        return self.level.samples[self.set_start[sets] + xs].astype(np.int64)

    def fingerprints(self, fi: np.ndarray, idx: np.ndarray) -> np.ndarray:
        if self.fps is not None:
            return self.fps[fi, idx]
        fp = np.empty(idx.size, dtype=np.uint64)
        for f in np.unique(fi):
            sel = fi == f
            fp[sel] = fingerprint(self.functions[int(f)].keys(idx[sel]))
        if self.counter is not None:
            self.counter.add(idx.size)
        return fp

    def __call__(self, groups: np.ndarray, xs: np.ndarray) -> np.ndarray:
        fi, sets = self.split(groups)
        idx = self.level.samples[self.set_start[sets] + xs].astype(np.int64)
        return self.set_hash(fi, sets, self.fingerprints(fi, idx))


def plan_levels(N: int, sigma: float, seed: int, config: InverterConfig = InverterConfig()) -> list[SampleLevel]:
    """Subsets and chain layouts of every level, without any chain tables."""
    levels: list[SampleLevel] = []
    for kappa in kappa_levels(N, config):
        level = _build_level(N, kappa, sigma, seed, config)
        if level is None:
            log.info("level kappa=%d skipped: subsets too small; larger preimages fall back to a scan", kappa)
            break
        levels.append(level)
    return levels


def projected_nbytes(N: int, R: int, sigma: float, seed: int, config: InverterConfig = InverterConfig()) -> int:
    """Exact ``nbytes`` of the inverter :func:`build_all_inverter` would produce, without walking chains."""
    total = 0
    for lv in plan_levels(N, sigma, seed, config):
        per_table = lv.layout.total_chains * lv.layout.chain_dtype().itemsize
        total += lv.shared_nbytes() + 2 * R * per_table
    return total


def build_all_inverter(functions: Sequence[KeyFunction], N: int, sigma: float, seed: int,
                       config: InverterConfig = InverterConfig()) -> AllInverter:
    """Build subsets, hashes and chain tables for every function.

    Deterministic in ``seed``.  Build cost is one pass of each function over
    ``[N]`` plus the chain walks.
    """
    R = len(functions)
    if N < 2:
        raise ValueError("domain size N must be at least 2")
    if R < 1:
        raise ValueError("need at least one function")
    if not 1 <= sigma <= N:
        raise ValueError(f"sigma must lie in [1, N], got {sigma}")
    for f in functions:
        if f.domain_size != N:
            raise ValueError(f"function domain {f.domain_size} differs from N = {N}")
    levels = plan_levels(N, sigma, seed, config)
    counter = EvalCounter()
    per_fn_lanes = max(1, max((lv.layout.total_chains for lv in levels), default=1))
    batch = max(1, min(R, config.batch_lanes // per_fn_lanes))
    for first in range(0, R, batch):
        fns = functions[first:first + batch]
        fps = np.stack([fingerprint(f.keys(np.arange(N))) for f in fns])
        counter.add(N * len(fns))
        for level in levels:
            _build_level_chains(level, fns, fps, first, seed, config, counter)
    inv = AllInverter(N, R, float(sigma), seed, config, levels, functions, counter.count)
    if inv.stored_entries > inv.space_bound():
        raise AssertionError("all-function inverter exceeds its space bound")
    return inv


def _build_level_chains(level: SampleLevel, fns, fps, first, seed, config, counter) -> None:
    B, G = len(fns), level.layout.groups
    base = level.layout
    per_fn = base.total_chains
    stacked = ChainLayout(
        np.tile(base.domain, B),
        np.concatenate([[0], np.cumsum(np.tile(np.diff(base.offsets), B))]),
        np.tile(base.length, B),
        base.key,
        group_base=first * G,
    )
    evaluate = _LevelFunctions(level, seed, config.range_factor, first, fps=fps)
    starts, ends = stacked.build(evaluate, counter)
    for b in range(B):
        level.starts.append(starts[b * per_fn:(b + 1) * per_fn])
        level.ends.append(ends[b * per_fn:(b + 1) * per_fn])


@dataclass
class InvertStats:
    """Work done by one :func:`invert_all` call."""

    f_evals: int = 0
    levels_queried: int = 0
    fallback: bool = False
    incomplete: bool | None = None


def brute_preimage(f: KeyFunction, N: int, target, counter: EvalCounter | None = None) -> np.ndarray:
    """Every ``j`` in ``[N]`` with ``f(j) == target``, by a full scan."""
    target = as_key_matrix(target)[0]
    out = []
    step = 1 << 16
    for lo in range(0, N, step):
        idx = np.arange(lo, min(N, lo + step))
        keys = f.keys(idx)
        if keys.shape[1] == target.size:
            out.append(idx[(keys == target).all(axis=1)])
    if counter is not None:
        counter.add(N)
    return np.concatenate(out).astype(np.int64) if out else np.empty(0, dtype=np.int64)


def invert_all(inv: AllInverter, i: int, target, verify: bool = False,
               stats: InvertStats | None = None) -> np.ndarray:
    """Sorted preimage of ``target`` under function ``i`` (0-based).

    Every returned index ``j`` satisfies ``f_i(j) == target``.  With high
    probability nothing is missed; ``verify=True`` also runs the full scan,
    records in ``stats.incomplete`` whether the structure missed elements and
    returns the exact preimage.
    """
    if inv.functions is None:
        raise ValueError("no functions attached to this inverter")
    if not 0 <= i < inv.R:
        raise IndexError(f"function index {i} outside [0, {inv.R})")
    stats = stats if stats is not None else InvertStats()
    counter = EvalCounter()
    f = inv.functions[i]
    target = as_key_matrix(target)[0]
    if target.size != f.key_width:
        return np.empty(0, dtype=np.int64)
    fp = fingerprint(target[None, :])[0]
    found: set[int] = set()
    result = None
    for level in inv.levels:
        stats.levels_queried += 1
        G = level.layout.groups
        evaluate = _LevelFunctions(level, inv.seed, inv.config.range_factor, i, functions=[f], counter=counter)
        groups = np.arange(G, dtype=np.int64)
        sets = level.group_set.astype(np.int64)
        targets = evaluate.set_hash(np.zeros(G, dtype=np.int64), sets, np.full(G, fp, dtype=np.uint64))
        lanes, xs = level.layout.view(i * G).query(level.starts[i], level.ends[i], evaluate, groups, targets, counter)
        if xs.size:
            cand = np.unique(evaluate.domain_index(groups[lanes], xs))
            keys = f.keys(cand)
            counter.add(cand.size)
            found.update(int(j) for j in cand[(keys == target).all(axis=1)])
        if len(found) < level.kappa:
            result = np.array(sorted(found), dtype=np.int64)
            break
    if result is None:
        stats.fallback = True
        result = brute_preimage(f, inv.N, target, counter)
    stats.f_evals += counter.count
    if verify:
        exact = brute_preimage(f, inv.N, target)
        stats.incomplete = not np.array_equal(exact, result)
        result = exact
    return result


# AFIV layout (little-endian): magic "AFIV", version u16, reserved u16, then
# sections, each a 4-byte tag, a u64 payload length and the payload.
#   "HEAD": N u64, R u32, sigma f64, seed u64, sets_per_unit f64,
#           fallback_factor f64, range_factor u32, max_kappa u32 (0 = none),
#           level count u32
#   "LEVL": kappa u32, then arrays set_offsets, samples, group domain,
#           group offsets, group length, group_set, and per function
#           starts then ends
# Each array is a dtype code (1 byte: 'B','H','I','Q','q'), a u64 element
# count and the raw little-endian data.
_HEAD = struct.Struct("<QIdQddIII")
_ARRAY = struct.Struct("<cQ")
_DTYPES = {b"B": "<u1", b"H": "<u2", b"I": "<u4", b"Q": "<u8", b"q": "<i8"}
_CODES = {np.dtype(v).str: k for k, v in _DTYPES.items()}


def _put_array(out: io.BytesIO, arr: np.ndarray) -> None:
    arr = np.ascontiguousarray(arr)
    dt = arr.dtype.newbyteorder("<")
    code = _CODES[dt.str]
    out.write(_ARRAY.pack(code, arr.size))
    out.write(arr.astype(dt).tobytes())


def _section(tag: bytes, payload: bytes) -> bytes:
    return tag + struct.pack("<Q", len(payload)) + payload


def inverter_bytes(inv: AllInverter) -> bytes:
    cfg = inv.config
    head = _HEAD.pack(inv.N, inv.R, inv.sigma, inv.seed, cfg.sets_per_unit, cfg.fallback_factor,
                      cfg.range_factor, cfg.max_kappa or 0, len(inv.levels))
    parts = [INVERTER_MAGIC, struct.pack("<HH", INVERTER_VERSION, 0), _section(b"HEAD", head)]
    for lv in inv.levels:
        buf = io.BytesIO()
        buf.write(struct.pack("<I", lv.kappa))
        for arr in (lv.set_offsets, lv.samples, lv.layout.domain, lv.layout.offsets, lv.layout.length, lv.group_set):
            _put_array(buf, arr)
        for s, e in zip(lv.starts, lv.ends):
            _put_array(buf, s)
            _put_array(buf, e)
        parts.append(_section(b"LEVL", buf.getvalue()))
    return b"".join(parts)


def save_inverter(inv: AllInverter, path) -> None:
    with open(path, "wb") as fh:
        fh.write(inverter_bytes(inv))


class _Reader:
    def __init__(self, data: bytes, pos: int = 0) -> None:
        self.data, self.pos = data, pos

    def take(self, n: int, what: str) -> bytes:
        if self.pos + n > len(self.data):
            raise FormatError(f"truncated {what}", len(self.data))
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, st: struct.Struct, what: str) -> tuple:
        return st.unpack(self.take(st.size, what))

    def array(self) -> np.ndarray:
        at = self.pos
        code, count = self.unpack(_ARRAY, "array header")
        if code not in _DTYPES:
            raise FormatError(f"unknown dtype code {code!r}", at)
        dt = np.dtype(_DTYPES[code])
        raw = self.take(count * dt.itemsize, "array payload")
        return np.frombuffer(raw, dtype=dt).astype(dt.newbyteorder("="))


def parse_inverter(data: bytes, functions: Sequence[KeyFunction] | None = None) -> AllInverter:
    """Inverse of :func:`inverter_bytes`; attaches ``functions`` when given."""
    if data[:4] != INVERTER_MAGIC:
        raise FormatError(f"bad magic {data[:4]!r}, expected {INVERTER_MAGIC!r}", 0)
    rd = _Reader(data, 4)
    version, reserved = rd.unpack(struct.Struct("<HH"), "header")
    if version != INVERTER_VERSION:
        raise FormatError(f"unsupported version {version}", 4)
    if reserved != 0:
        raise FormatError("reserved field must be zero", 6)
    sections: list[tuple[bytes, int, _Reader]] = []
    while rd.pos < len(data):
        tag = rd.take(4, "section tag")
        (length,) = rd.unpack(struct.Struct("<Q"), "section length")
        start = rd.pos
        sections.append((tag, start, _Reader(rd.take(length, f"section {tag!r}"), 0)))
    if not sections or sections[0][0] != b"HEAD":
        raise FormatError("missing HEAD section", 8)
    N, R, sigma, seed, a, c2, c1, max_kappa, n_levels = sections[0][2].unpack(_HEAD, "HEAD")
    config = InverterConfig(a, c2, c1, max_kappa or None)
    levels = []
    for tag, start, sec in sections[1:]:
        if tag != b"LEVL":
            raise FormatError(f"unknown section {tag!r}", start - 12)
        (kappa,) = sec.unpack(struct.Struct("<I"), "level kappa")
        set_offsets, samples, domain, offsets, length, group_set = (sec.array() for _ in range(6))
        layout = ChainLayout(domain, offsets, length, _level_key(seed, kappa, 1))
        level = SampleLevel(kappa, set_offsets, samples, layout, group_set)
        for _ in range(R):
            level.starts.append(sec.array())
            level.ends.append(sec.array())
        if sec.pos != len(sec.data):
            raise FormatError("trailing bytes in LEVL section", start + sec.pos)
        levels.append(level)
    if len(levels) != n_levels:
        raise FormatError(f"expected {n_levels} levels, found {len(levels)}", len(data))
    inv = AllInverter(N, R, sigma, seed, config, levels)
    if functions is not None:
        inv.attach(functions)
    return inv


def load_inverter(path, functions: Sequence[KeyFunction] | None = None) -> AllInverter:
    with open(path, "rb") as fh:
        return parse_inverter(fh.read(), functions)
