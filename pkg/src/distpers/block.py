"""Per-node kernel: index ranges, the pivot-indexed store, and block reduction."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np

from . import kernels


class ConsistencyError(RuntimeError):
    """Internal invariant broken (pivot collision, misrouted column, ...)."""


@dataclass(frozen=True)
class RangePartition:
    bounds: tuple[int, ...]

    def __post_init__(self):
        b = self.bounds
        if len(b) < 2 or b[0] != 0 or any(x >= y for x, y in zip(b, b[1:])):
            raise ValueError(f"bounds must be 0 = r0 < ... < rp, got {b}")

    @property
    def p(self) -> int:
        return len(self.bounds) - 1

    @property
    def n(self) -> int:
        return self.bounds[-1]

    def lo(self, i: int) -> int:
        return self.bounds[i - 1]

    def hi(self, i: int) -> int:
        return self.bounds[i]

    def range_of(self, index: int) -> int:
        """Range number i with r_{i-1} < index <= r_i."""
        if not 1 <= index <= self.n:
            raise IndexError(index)
        return int(np.searchsorted(self.bounds, index, side="left"))


def make_partition(n: int, p: int) -> RangePartition:
    if p < 1 or p > n:
        raise ValueError(f"need 1 <= p <= n, got p={p}, n={n}")
    return RangePartition(tuple(-(-i * n // p) for i in range(p + 1)))


class WorkColumn(NamedTuple):
    index: int
    dim: int
    rows: np.ndarray


@dataclass
class WorkSet:
    """Unreduced columns of one column range, sorted by global index."""

    range_index: int
    columns: list[WorkColumn] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.columns)

    def indices(self) -> list[int]:
        return [c.index for c in self.columns]


class PivotStore:
    """Reduced columns whose pivot lies in (lo, hi], addressed by pivot - lo."""

    def __init__(self, range_index: int, lo: int, hi: int):
        self.range_index = range_index
        self.lo = lo
        self.hi = hi
        self.slots: list[np.ndarray | None] = [None] * (hi - lo)
        self._owner = np.zeros(hi - lo, dtype=np.int64)
        self._dim = np.zeros(hi - lo, dtype=np.int16)
        self._count = 0

    @classmethod
    def for_range(cls, partition: RangePartition, i: int) -> "PivotStore":
        return cls(i, partition.lo(i), partition.hi(i))

    def __len__(self) -> int:
        return self._count

    def __contains__(self, piv: int) -> bool:
        return self.lo < piv <= self.hi and self.slots[piv - self.lo - 1] is not None

    def insert(self, index: int, rows: np.ndarray, dim: int) -> None:
        piv = int(rows[-1])
        if not self.lo < piv <= self.hi:
            raise ConsistencyError(f"column {index} has pivot {piv} outside ({self.lo}, {self.hi}]")
        k = piv - self.lo - 1
        if self.slots[k] is not None:
            raise ConsistencyError(
                f"pivot collision at {piv}: columns {int(self._owner[k])} and {index}"
            )
        self.slots[k] = rows
        self._owner[k] = index
        self._dim[k] = dim
        self._count += 1

    def owner(self, piv: int) -> int:
        return int(self._owner[piv - self.lo - 1])

    def column(self, piv: int) -> np.ndarray | None:
        return self.slots[piv - self.lo - 1]

    def pairs(self) -> list[tuple[int, int, int]]:
        """(pivot, column index, column dim) for every stored column."""
        k = np.nonzero(self._owner)[0]
        return [(int(x) + self.lo + 1, int(self._owner[x]), int(self._dim[x])) for x in k]

    def pivots(self) -> list[int]:
        return [int(x) + self.lo + 1 for x in np.nonzero(self._owner)[0]]


@dataclass
class BlockResult:
    residual: WorkSet
    zeros: list[tuple[int, int]]  # (index, dim) of columns reduced to zero
    stored: list[int]
    pivots: list[int]
    additions: int


def reduce_block(store: PivotStore, work: WorkSet, trace: list | None = None) -> BlockResult:
    """Reduce block (store.range_index, work.range_index) in place.

    Each work column, in increasing index order, absorbs stored columns until its
    pivot has no partner in this row range.  Columns left with a pivot in the range
    move into ``store``; zero columns are reported; the rest are returned as the
    residual for the next node down.  ``trace`` receives ``(source, target)``
    for every column addition.
    """
    lo, hi = store.lo, store.hi
    residual = WorkSet(work.range_index)
    zeros: list[tuple[int, int]] = []
    stored: list[int] = []
    pivots: list[int] = []
    additions = 0
    last = 0
    piv_trace = [] if trace is not None else None
    for wc in work.columns:
        if wc.index <= last:
            raise ConsistencyError("work columns must be in increasing index order")
        last = wc.index
        rows, adds = kernels.reduce_column(wc.rows, lo, store.slots, piv_trace)
        additions += adds
        if piv_trace:
            trace.extend((store.owner(pv), wc.index) for pv in piv_trace)
            piv_trace.clear()
        piv = int(rows[-1]) if len(rows) else 0
        if piv > hi:
            raise ConsistencyError(
                f"column {wc.index} reached node {store.range_index} with pivot {piv} above its range"
            )
        if piv == 0:
            zeros.append((wc.index, wc.dim))
        elif piv > lo:
            store.insert(wc.index, rows, wc.dim)
            stored.append(wc.index)
            pivots.append(piv)
        else:
            residual.columns.append(WorkColumn(wc.index, wc.dim, rows))
    return BlockResult(residual, zeros, stored, pivots, additions)


Block = tuple[int, int]


def scheduling_order(p: int) -> dict[Block, frozenset[Block]]:
    """Dependencies of each block (i, j), i <= j: (i, j-1) and (i+1, j) where they exist."""
    if p < 1:
        raise ValueError("p must be >= 1")
    deps = {}
    for i in range(1, p + 1):
        for j in range(i, p + 1):
            before = set()
            if j - 1 >= i:
                before.add((i, j - 1))
            if i + 1 <= j:
                before.add((i + 1, j))
            deps[(i, j)] = frozenset(before)
    return deps


def independent(a: Block, b: Block) -> bool:
    (i, j), (k, l) = a, b
    return (i < k and j < l) or (i > k and j > l)


def respects_order(trace: Iterable[Block], p: int) -> bool:
    """True if ``trace`` (block completions in time order) runs each block once, after its dependencies."""
    deps = scheduling_order(p)
    done: set[Block] = set()
    for blk in trace:
        if blk not in deps or blk in done or not deps[blk] <= done:
            return False
        done.add(blk)
    return done == set(deps)
