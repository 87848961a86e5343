"""Synthetic 3D fields with a power-law spectrum, built from random-phase cosines."""
from __future__ import annotations

import numpy as np

from .cubical import Image3D


def generate_image(extents, seed: int, exponent: float, n_modes: int = 256) -> Image3D:
    """Sum of ``n_modes`` random-phase cosines with amplitude ``|k|^(-exponent/2)``.

    Wave vectors are drawn uniformly from the integer lattice up to the Nyquist
    limit of each axis.  Exponent 0 gives equal weight to all frequencies.
    """
    extents = tuple(int(e) for e in extents)
    if len(extents) != 3 or min(extents) < 1:
        raise ValueError(f"extents must be three integers >= 1, got {extents}")
    rng = np.random.default_rng(seed)
    kmax = np.array([e // 2 for e in extents])
    lattice = rng.integers(-kmax, kmax + 1, size=(n_modes, 3))
    phases = rng.uniform(0.0, 2.0 * np.pi, size=n_modes)
    wave = 2.0 * np.pi * lattice / np.array(extents, dtype=np.float64)
    norm = np.linalg.norm(wave, axis=1)
    amp = np.zeros(n_modes)
    live = norm > 0
    amp[live] = norm[live] ** (-exponent / 2.0)

    grid = np.indices(extents, dtype=np.float64).reshape(3, -1)
    field = np.zeros(grid.shape[1])
    for start in range(0, n_modes, 32):
        sl = slice(start, start + 32)
        # explicit sum, not matmul: keeps output independent of the BLAS build
        arg = np.einsum("mk,kn->mn", wave[sl], grid, optimize=False) + phases[sl, None]
        field += (amp[sl, None] * np.cos(arg)).sum(axis=0)
    return Image3D(field.reshape(extents))


def count_local_minima(img: Image3D) -> int:
    """Voxels strictly below all of their (up to six) face neighbours."""
    v = img.values
    padded = np.pad(v, 1, mode="constant", constant_values=np.inf)
    core = padded[1:-1, 1:-1, 1:-1]
    is_min = np.ones(v.shape, dtype=bool)
    for axis in range(3):
        for shift in (-1, 1):
            is_min &= core < np.roll(padded, shift, axis=axis)[1:-1, 1:-1, 1:-1]
    return int(is_min.sum())
