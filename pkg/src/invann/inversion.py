"""Hellman-style chain tables for inverting a function with less than a full table.

A *group* is one Hellman table: ``chains`` chains of length ``t`` over the
domain ``[M]``.  The chain step is ``x -> g(f(x))`` where ``g`` is a
pairwise-independent reduction from the codomain of ``f`` back onto ``[M]``,
keyed per group.  Only the start and end of each chain are kept, with ends
sorted inside each group so a lookup is a binary search.

Many groups are packed into one pair of flat arrays so that builds and queries
run as a few vectorised numpy passes, whatever the number of groups.  The
single-function :class:`InversionTable` is the case where every group shares
one ``f``; the all-function inverter packs groups from thousands of sampled
sub-functions the same way.

Sizes for a domain of ``M`` with space factor ``sigma``::

    t       = ceil(sigma)                  chain length
    chains  = ceil(M / (sigma * t))        per table
    tables  = max(ceil(log2 M), ceil(M / (chains * t)))

so the tables cover about ``max(M, M log2(M) / sigma)`` points while storing
``O((M / sigma) log M)`` endpoints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ._rng import GOLDEN, derive, mix64
from .hashing import P31, affine31, pairwise31_params

__all__ = [
    "SPACE_CONSTANT",
    "WORK_CONSTANT",
    "EvalCounter",
    "ChainLayout",
    "chain_shape",
    "InversionTable",
    "build_inversion",
    "invert_one",
]

# stored endpoints <= SPACE_CONSTANT * (M / sigma) * log2(M)**2
SPACE_CONSTANT = 4
# f-evaluations per invert_one <= WORK_CONSTANT * sigma**2 * log2(M)**2
WORK_CONSTANT = 8


@dataclass
class EvalCounter:
    """Counts evaluations of the function being inverted."""

    count: int = 0

    def add(self, n: int) -> None:
        self.count += int(n)


def log2_ceil(m: int) -> int:
    return max(1, math.ceil(math.log2(m))) if m > 1 else 1


def chain_shape(M: int, sigma: float) -> tuple[int, int, int]:
    """``(t, chains_per_table, tables)`` for a domain of size ``M``."""
    sigma = min(max(float(sigma), 1.0), float(M))
    t = max(1, math.ceil(sigma - 1e-12))
    chains = max(1, math.ceil(M / (sigma * t) - 1e-12))
    tables = max(log2_ceil(M), math.ceil(M / (chains * t)))
    return t, chains, tables


def index_dtype(upper: int) -> np.dtype:
    """Smallest unsigned dtype holding values below ``upper``."""
    for dt in (np.uint8, np.uint16, np.uint32):
        if upper <= np.iinfo(dt).max + 1:
            return np.dtype(dt)
    return np.dtype(np.uint64)


def group_salts(key: int, groups: np.ndarray) -> np.ndarray:
    g = np.asarray(groups, dtype=np.uint64) + np.uint64(1)
    with np.errstate(over="ignore"):
        return mix64(np.uint64(key) ^ mix64(g * np.uint64(GOLDEN)))


# evaluate(groups, xs) -> values of f_g at xs; groups and xs are int64 arrays
Evaluate = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(eq=False)
class ChainLayout:
    """Shape of a packed collection of Hellman tables.

    Group ``g`` has domain ``[domain[g]]``, chains of ``length[g]`` steps and
    owns entries ``offsets[g]:offsets[g + 1]`` of the flat start/end arrays.
    Its reduction is keyed by ``(key, group_base + g)``, so several functions
    can share one layout's arrays under different ``group_base`` values.
    """

    domain: np.ndarray
    offsets: np.ndarray
    length: np.ndarray
    key: int
    group_base: int = 0

    def __post_init__(self) -> None:
        self.domain = np.asarray(self.domain, dtype=np.int64)
        self.offsets = np.asarray(self.offsets, dtype=np.int64)
        self.length = np.asarray(self.length, dtype=np.int64)
        self._params: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None

    @classmethod
    def from_shapes(cls, domain: np.ndarray, sigma: float, key: int, group_base: int = 0) -> "ChainLayout":
        """One group per domain entry, each shaped by :func:`chain_shape`."""
        shapes = np.array([chain_shape(int(m), sigma)[:2] for m in domain], dtype=np.int64).reshape(-1, 2)
        offsets = np.zeros(len(domain) + 1, dtype=np.int64)
        np.cumsum(shapes[:, 1], out=offsets[1:])
        return cls(domain, offsets, shapes[:, 0], key, group_base)

    def view(self, group_base: int) -> "ChainLayout":
        return ChainLayout(self.domain, self.offsets, self.length, self.key, group_base)

    @property
    def groups(self) -> int:
        return len(self.domain)

    @property
    def t(self) -> int:
        return int(self.length.max(initial=0))

    @property
    def total_chains(self) -> int:
        return int(self.offsets[-1])

    @property
    def nbytes(self) -> int:
        return int(self.domain.nbytes + self.offsets.nbytes + self.length.nbytes)

    def chain_dtype(self) -> np.dtype:
        return index_dtype(int(self.domain.max(initial=1)))

    def reduce(self, groups: np.ndarray, values: np.ndarray) -> np.ndarray:
        if self._params is None:
            # derived once per layout; chain steps only gather
            ids = np.arange(self.groups, dtype=np.int64) + self.group_base
            a, b = pairwise31_params(group_salts(self.key, ids))
            self._params = a, b, self.domain.astype(np.uint64)
        a, b, m = self._params
        return affine31(values, a[groups], b[groups], m[groups])

    def build(self, evaluate: Evaluate, counter: EvalCounter | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Walk every chain; return ``(starts, ends)`` sorted by end within each group."""
        counts = np.diff(self.offsets)
        groups = np.repeat(np.arange(self.groups, dtype=np.int64), counts)
        pos = np.arange(self.total_chains, dtype=np.int64) - np.repeat(self.offsets[:-1], counts)
        # evenly spaced, distinct start points in each group's domain
        starts = (pos * self.domain[groups]) // np.maximum(counts[groups], 1)
        steps = self.length[groups]
        x = starts.copy()
        for step in range(self.t):
            move = steps > step
            if move.all():
                x = self.reduce(groups, evaluate(groups, x))
            else:
                x[move] = self.reduce(groups[move], evaluate(groups[move], x[move]))
            if counter is not None:
                counter.add(int(move.sum()))
        # starts already increase within a group, so a stable sort on (group, end) suffices
        span = int(self.domain.max(initial=1)) + 1
        if self.groups * span < 1 << 62:
            order = np.argsort(groups * span + x, kind="stable")
        else:
            order = np.lexsort((starts, x, groups))
        dt = self.chain_dtype()
        return starts[order].astype(dt), x[order].astype(dt)

    def _lower_bound(self, ends: np.ndarray, groups: np.ndarray, z: np.ndarray) -> np.ndarray:
        lo = self.offsets[groups].copy()
        hi = self.offsets[groups + 1].copy()
        last = len(ends) - 1
        active = lo < hi
        while active.any():
            mid = (lo + hi) >> 1
            right = active & (ends[np.minimum(mid, last)] < z)
            lo = np.where(right, mid + 1, lo)
            hi = np.where(active & ~right, mid, hi)
            active = lo < hi
        return lo

    def query(self, starts: np.ndarray, ends: np.ndarray, evaluate: Evaluate, groups: np.ndarray,
              targets: np.ndarray, counter: EvalCounter | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Find ``x`` with ``f_g(x) == target`` for each lane ``(group, target)``.

        Returns ``(lane, x)`` arrays of verified hits in (lane, chain) order,
        possibly with repeats.  Misses are silent.
        """
        groups = np.asarray(groups, dtype=np.int64)
        targets = np.asarray(targets, dtype=np.int64)
        empty = np.empty(0, np.int64), np.empty(0, np.int64)
        if groups.size == 0 or len(ends) == 0:
            return empty
        ends64 = ends.astype(np.int64)
        last = len(ends64) - 1
        stop = self.offsets[groups + 1]
        steps = self.length[groups]
        lanes = np.arange(groups.size, dtype=np.int64)
        z = self.reduce(groups, targets)
        alarm_lane, alarm_chain, alarm_walk = [], [], []
        for s in range(int(steps.max(initial=0))):
            live = steps > s
            lv, g, zz = lanes[live], groups[live], z[live]
            pos = self._lower_bound(ends64, g, zz)
            hit = (pos < stop[lv]) & (ends64[np.minimum(pos, last)] == zz)
            while hit.any():
                alarm_lane.append(lv[hit])
                alarm_chain.append(pos[hit])
                alarm_walk.append(steps[lv[hit]] - 1 - s)
                pos = pos + 1
                hit = hit & (pos < stop[lv]) & (ends64[np.minimum(pos, last)] == zz)
            more = steps[lv] > s + 1
            if more.any():
                adv = lv[more]
                z[adv] = self.reduce(groups[adv], evaluate(groups[adv], z[adv]))
                if counter is not None:
                    counter.add(adv.size)
        if not alarm_lane:
            return empty
        lane = np.concatenate(alarm_lane)
        chain = np.concatenate(alarm_chain)
        walk = np.concatenate(alarm_walk)
        g = groups[lane]
        x = starts[chain].astype(np.int64)
        for u in range(int(walk.max(initial=0))):
            move = walk > u
            x[move] = self.reduce(g[move], evaluate(g[move], x[move]))
            if counter is not None:
                counter.add(int(move.sum()))
        fx = evaluate(g, x)
        if counter is not None:
            counter.add(x.size)
        ok = fx == targets[lane]
        order = np.lexsort((chain[ok], lane[ok]))
        return lane[ok][order], x[ok][order]


@dataclass(eq=False)
class InversionTable:
    """Space-``O~(M / sigma)`` inverter for one function ``f: [M] -> [M]``."""

    f: Callable[[np.ndarray], np.ndarray]
    M: int
    sigma: float
    seed: int
    layout: ChainLayout
    starts: np.ndarray
    ends: np.ndarray

    @property
    def t(self) -> int:
        return self.layout.t

    @property
    def tables(self) -> int:
        return self.layout.groups

    @property
    def stored_entries(self) -> int:
        return int(self.starts.size + self.ends.size)

    @property
    def nbytes(self) -> int:
        return int(self.starts.nbytes + self.ends.nbytes)

    def space_bound(self) -> float:
        return SPACE_CONSTANT * (self.M / self.sigma) * math.log2(self.M) ** 2

    def work_bound(self) -> float:
        return WORK_CONSTANT * self.sigma**2 * math.log2(self.M) ** 2


def _as_evaluate(f: Callable[[np.ndarray], np.ndarray]) -> Evaluate:
    def evaluate(groups: np.ndarray, xs: np.ndarray) -> np.ndarray:
        return np.asarray(f(xs), dtype=np.int64)

    return evaluate


def build_inversion(f: Callable[[np.ndarray], np.ndarray], M: int, sigma: float, seed: int,
                    counter: EvalCounter | None = None) -> InversionTable:
    """Build chain tables for a vectorised ``f`` mapping int arrays in ``[M]`` to ``[M]``."""
    if M < 2:
        raise ValueError("domain size M must be at least 2")
    if M > P31:
        raise ValueError("domain size must stay below 2**31 - 1")
    if not 1 <= sigma <= M:
        raise ValueError(f"sigma must lie in [1, M], got {sigma}")
    t, chains, tables = chain_shape(M, sigma)
    offsets = np.arange(tables + 1, dtype=np.int64) * chains
    layout = ChainLayout(np.full(tables, M), offsets, np.full(tables, t), derive(seed, 0x1417))
    starts, ends = layout.build(_as_evaluate(f), counter)
    table = InversionTable(f, M, float(sigma), seed, layout, starts, ends)
    if table.stored_entries > table.space_bound():
        raise AssertionError("chain storage exceeds the space bound")
    return table


def invert_one(table: InversionTable, y: int, counter: EvalCounter | None = None) -> int | None:
    """Return some ``x`` with ``f(x) == y``, or ``None``.

    A returned ``x`` is always checked against ``f``; chain merges and values
    outside the image only ever produce ``None``.
    """
    if not 0 <= y < table.M:
        return None
    groups = np.arange(table.tables, dtype=np.int64)
    targets = np.full(table.tables, int(y), dtype=np.int64)
    _, xs = table.layout.query(table.starts, table.ends, _as_evaluate(table.f), groups, targets, counter)
    return int(xs[0]) if xs.size else None
