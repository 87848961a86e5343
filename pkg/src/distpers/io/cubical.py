"""Lower-star cubical filtrations of 3D grayscale images.

Voxels become vertices at even grid coordinates of a (2nx-1, 2ny-1, 2nz-1)
grid; every other grid point is a cube whose dimension is its number of odd
coordinates and whose value is the maximum over the vertices of its closure.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..matrix import BoundaryMatrix

_MAX_CELLS = 2**63 - 1


@dataclass(frozen=True)
class Image3D:
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 3 or min(v.shape) < 1:
            raise ValueError(f"image must be 3-dimensional with extents >= 1, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("image values must be finite")
        object.__setattr__(self, "values", v)

    @property
    def extents(self) -> tuple[int, int, int]:
        return tuple(int(x) for x in self.values.shape)


@dataclass(frozen=True)
class CubicalFiltration:
    matrix: BoundaryMatrix
    values: np.ndarray  # filtration value of index k at values[k-1]
    coords: np.ndarray  # (n, 3) grid coordinates of index k at coords[k-1]


def cell_count(extents) -> int:
    n = 1
    for e in extents:
        n *= 2 * int(e) - 1
    return n


def _closure_max(vox: np.ndarray) -> np.ndarray:
    out = vox
    for axis in range(3):
        size = out.shape[axis]
        shape = list(out.shape)
        shape[axis] = 2 * size - 1
        grown = np.empty(shape, dtype=out.dtype)
        even = [slice(None)] * 3
        odd = [slice(None)] * 3
        even[axis] = slice(0, None, 2)
        odd[axis] = slice(1, None, 2)
        grown[tuple(even)] = out
        lo = [slice(None)] * 3
        hi = [slice(None)] * 3
        lo[axis] = slice(0, -1)
        hi[axis] = slice(1, None)
        grown[tuple(odd)] = np.maximum(out[tuple(lo)], out[tuple(hi)])
        out = grown
    return out


def cubical_filtration(img: Image3D | np.ndarray) -> CubicalFiltration:
    if not isinstance(img, Image3D):
        img = Image3D(img)
    n = cell_count(img.extents)
    if n > _MAX_CELLS:
        raise OverflowError(f"{n} cells exceed the 64-bit index range")
    grid_vals = _closure_max(img.values)
    shape = grid_vals.shape
    ix, iy, iz = np.indices(shape, dtype=np.int64)
    dims = ((ix & 1) + (iy & 1) + (iz & 1)).ravel()
    vals = grid_vals.ravel()
    flat = np.arange(n, dtype=np.int64)
    # value, then dimension, then lexicographic (x, y, z) == C-order flat index
    order = np.lexsort((flat, dims, vals))
    rank = np.empty(n, dtype=np.int64)
    rank[order] = np.arange(1, n + 1, dtype=np.int64)

    strides = (shape[1] * shape[2], shape[2], 1)
    faces = np.zeros((n, 6), dtype=np.int64)
    for axis, (coord, stride) in enumerate(zip((ix, iy, iz), strides)):
        odd = (coord.ravel() & 1).astype(bool)
        where = flat[odd]
        faces[odd, 2 * axis] = rank[where - stride]
        faces[odd, 2 * axis + 1] = rank[where + stride]
    faces = np.sort(faces[order], axis=1)
    cell_dims = dims[order]
    rows = faces[faces > 0]
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(2 * cell_dims, out=offsets[1:])
    coords = np.stack([ix.ravel(), iy.ravel(), iz.ravel()], axis=1)[order]
    return CubicalFiltration(BoundaryMatrix(cell_dims, offsets, rows), vals[order], coords)


def build_cubical(img: Image3D | np.ndarray) -> tuple[BoundaryMatrix, np.ndarray]:
    """Boundary matrix and per-index filtration values of an image's cubical complex."""
    f = cubical_filtration(img)
    return f.matrix, f.values
