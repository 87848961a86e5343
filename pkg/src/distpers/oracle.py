"""Sequential reference reductions.

Deliberately written with plain Python sets and a dict pivot table so that it
shares no code path with the kernels used by the block engine.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .matrix import BoundaryMatrix

INFINITE = math.inf


class PersistencePair(NamedTuple):
    birth: int
    death: int | float  # INFINITE for essential classes
    dim: int


@dataclass(frozen=True)
class PersistenceDiagram:
    pairs: frozenset[PersistencePair]
    essentials: frozenset[tuple[int, int]]  # (index, dim)

    def records(self) -> list[PersistencePair]:
        """Finite pairs and essential classes sorted by (dim, birth)."""
        out = list(self.pairs)
        out += [PersistencePair(i, INFINITE, d) for i, d in self.essentials]
        return sorted(out, key=lambda p: (p.dim, p.birth))


@dataclass(frozen=True)
class ReductionResult(PersistenceDiagram):
    reduced: BoundaryMatrix

    def diagram(self) -> PersistenceDiagram:
        return PersistenceDiagram(self.pairs, self.essentials)


def _eliminate(col: list[int], j: int, reduced, lookup, trace) -> list[int]:
    while col and col[-1] in lookup:
        k = lookup[col[-1]]
        if trace is not None:
            trace.append((k, j, col[-1]))
        col = sorted(set(col).symmetric_difference(reduced[k]))
    return col


def _result(m: BoundaryMatrix, cols: list[list[int]]) -> ReductionResult:
    dims = [int(d) for d in m.dims]
    pairs = frozenset(
        PersistencePair(c[-1], j, dims[c[-1] - 1]) for j, c in enumerate(cols, 1) if c
    )
    births = {p.birth for p in pairs}
    essentials = frozenset(
        (j, dims[j - 1]) for j, c in enumerate(cols, 1) if not c and j not in births
    )
    return ReductionResult(pairs, essentials, BoundaryMatrix.from_columns(cols, m.dims))


def standard_reduce(m: BoundaryMatrix, trace: list | None = None) -> ReductionResult:
    """Left-to-right column reduction with a pivot lookup table.

    If ``trace`` is given, each addition is appended as ``(source, target, pivot)``.
    """
    reduced: list[list[int]] = [[] for _ in range(m.n + 1)]
    lookup: dict[int, int] = {}
    for j in range(1, m.n + 1):
        col = _eliminate([int(r) for r in m.column(j)], j, reduced, lookup, trace)
        if col:
            lookup[col[-1]] = j
        reduced[j] = col
    return _result(m, reduced[1:])


def twist_reduce(m: BoundaryMatrix, trace: list | None = None) -> ReductionResult:
    """Dimension-by-dimension reduction, highest first, with clearing.

    Columns whose index became a pivot in dimension d+1 are zeroed without
    being reduced.  Only valid when the matrix squares to zero.
    """
    reduced: list[list[int]] = [[] for _ in range(m.n + 1)]
    lookup: dict[int, int] = {}
    cleared: set[int] = set()
    for d in range(m.max_dim, 0, -1):
        found = []
        for j in (int(x) + 1 for x in (m.dims == d).nonzero()[0]):
            if j in cleared:
                continue
            col = _eliminate([int(r) for r in m.column(j)], j, reduced, lookup, trace)
            if col:
                lookup[col[-1]] = j
                found.append(col[-1])
            reduced[j] = col
        cleared.update(found)
    return _result(m, reduced[1:])


def betti_numbers(res: PersistenceDiagram, d_max: int) -> list[int]:
    counts = [0] * (d_max + 1)
    for _, d in res.essentials:
        if d <= d_max:
            counts[d] += 1
    return counts
