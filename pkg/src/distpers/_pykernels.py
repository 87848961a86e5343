"""Pure-Python column kernels, used when the compiled extension is absent."""
from __future__ import annotations

import numpy as np

_EMPTY = np.empty(0, dtype=np.int64)


def xor_columns(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if len(a) == 0:
        return np.array(b, dtype=np.int64)
    if len(b) == 0:
        return np.array(a, dtype=np.int64)
    return np.setxor1d(a, b, assume_unique=True).astype(np.int64, copy=False)


def reduce_column(col, lo, slots, trace=None):
    """Add stored columns into ``col`` while its pivot hits an occupied slot.

    ``slots[k]`` holds the reduced column with pivot ``lo + k + 1`` or None.
    Returns ``(column, number of additions)``.
    """
    n_slots = len(slots)
    adds = 0
    while len(col):
        piv = int(col[-1])
        k = piv - lo - 1
        if k < 0 or k >= n_slots:
            break
        src = slots[k]
        if src is None:
            break
        col = xor_columns(col, src)
        adds += 1
        if trace is not None:
            trace.append(piv)
    return col, adds
