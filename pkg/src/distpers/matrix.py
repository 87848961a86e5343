"""Z2 sparse columns and the boundary matrix container.

A column is a strictly increasing ``int64`` array of 1-based row indices.
Row index 0 never occurs; ``pivot`` returns 0 for the zero column.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import kernels

INDEX_DTYPE = np.int64


def column(rows: Iterable[int] = ()) -> np.ndarray:
    """Build a canonical column from arbitrary row indices (duplicates cancel)."""
    arr = np.asarray(list(rows), dtype=INDEX_DTYPE)
    if arr.size == 0:
        return np.empty(0, dtype=INDEX_DTYPE)
    uniq, counts = np.unique(arr, return_counts=True)
    return uniq[counts % 2 == 1]


def pivot(c: np.ndarray) -> int:
    return int(c[-1]) if len(c) else 0


def add_into(target: np.ndarray, source: np.ndarray) -> np.ndarray:
    """Return ``target + source`` over Z2 (symmetric difference)."""
    return kernels.xor_columns(target, source)


class MatrixError(ValueError):
    pass


@dataclass(frozen=True)
class Violation:
    kind: str  # "not upper-triangular" | "dimension mismatch" | "unsorted column"
    row: int
    col: int

    def __str__(self) -> str:
        return f"{self.kind} at ({self.row},{self.col})"


class BoundaryMatrix:
    """Column-compressed boundary matrix over Z2.

    ``offsets[j-1]:offsets[j]`` slices ``rows`` to give column ``j``.
    """

    __slots__ = ("dims", "offsets", "rows")

    def __init__(self, dims, offsets, rows):
        self.dims = np.ascontiguousarray(dims, dtype=INDEX_DTYPE)
        self.offsets = np.ascontiguousarray(offsets, dtype=INDEX_DTYPE)
        self.rows = np.ascontiguousarray(rows, dtype=INDEX_DTYPE)
        if len(self.offsets) != len(self.dims) + 1:
            raise MatrixError("offsets must have n+1 entries")

    @classmethod
    def from_columns(
        cls, columns: Sequence[Iterable[int]], dims: Sequence[int]
    ) -> "BoundaryMatrix":
        if len(columns) != len(dims):
            raise MatrixError("need one dimension per column")
        cols = [np.asarray(list(c) if not isinstance(c, np.ndarray) else c, dtype=INDEX_DTYPE)
                for c in columns]
        offsets = np.zeros(len(cols) + 1, dtype=INDEX_DTYPE)
        offsets[1:] = np.cumsum([len(c) for c in cols])
        rows = np.concatenate(cols) if cols else np.empty(0, dtype=INDEX_DTYPE)
        return cls(dims, offsets, rows)

    @property
    def n(self) -> int:
        return len(self.dims)

    @property
    def max_dim(self) -> int:
        return int(self.dims.max()) if self.n else 0

    def column(self, j: int) -> np.ndarray:
        return self.rows[self.offsets[j - 1]:self.offsets[j]]

    def dim(self, j: int) -> int:
        return int(self.dims[j - 1])

    def columns(self) -> list[np.ndarray]:
        return [self.column(j) for j in range(1, self.n + 1)]

    def nnz(self) -> int:
        return len(self.rows)

    def __len__(self) -> int:
        return self.n

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BoundaryMatrix):
            return NotImplemented
        return (
            np.array_equal(self.dims, other.dims)
            and np.array_equal(self.offsets, other.offsets)
            and np.array_equal(self.rows, other.rows)
        )

    def __repr__(self) -> str:
        return f"BoundaryMatrix(n={self.n}, nnz={self.nnz()}, max_dim={self.max_dim})"


def validate(m: BoundaryMatrix) -> Violation | None:
    """Return the first invariant violation in column order, or None."""
    if m.nnz() == 0:
        return None
    lengths = np.diff(m.offsets)
    cols = np.repeat(np.arange(1, m.n + 1, dtype=INDEX_DTYPE), lengths)
    rows = m.rows
    same_col = cols[1:] == cols[:-1]
    unsorted = np.zeros(len(rows), dtype=bool)
    unsorted[1:] = same_col & (rows[1:] <= rows[:-1])
    above = (rows < 1) | (rows >= cols)
    safe = np.clip(rows, 1, m.n) - 1
    mismatch = ~above & (m.dims[safe] != m.dims[cols - 1] - 1)
    bad = unsorted | above | mismatch
    if not bad.any():
        return None
    k = int(np.argmax(bad))
    kind = ("unsorted column" if unsorted[k]
            else "not upper-triangular" if above[k] else "dimension mismatch")
    return Violation(kind, int(rows[k]), int(cols[k]))


def boundary_squared_zero(m: BoundaryMatrix) -> bool:
    """True if the matrix squares to zero over Z2, i.e. describes a chain complex.

    Clearing is only sound for such matrices; the triangular and codimension
    invariants alone do not imply it.
    """
    if m.nnz() == 0:
        return True
    lengths = np.diff(m.offsets)
    cols = np.repeat(np.arange(1, m.n + 1, dtype=INDEX_DTYPE), lengths)
    faces = m.rows
    face_len = lengths[faces - 1]
    # every entry r of column f contributes (r, j) for each entry f of column j
    targets = np.repeat(cols, face_len)
    starts = m.offsets[faces - 1]
    gather = np.repeat(starts - np.cumsum(face_len) + face_len, face_len) + np.arange(face_len.sum())
    sub = m.rows[gather]
    if len(sub) == 0:
        return True
    keys = targets * (m.n + 1) + sub
    _, counts = np.unique(keys, return_counts=True)
    return bool(np.all(counts % 2 == 0))


def check(m: BoundaryMatrix) -> BoundaryMatrix:
    v = validate(m)
    if v is not None:
        raise MatrixError(str(v))
    return m


def triangle() -> BoundaryMatrix:
    """Filled triangle: vertices 1-3, edges 4-6, 2-cell 7."""
    return BoundaryMatrix.from_columns(
        [[], [], [], [1, 2], [1, 3], [2, 3], [4, 5, 6]], [0, 0, 0, 1, 1, 1, 2]
    )
