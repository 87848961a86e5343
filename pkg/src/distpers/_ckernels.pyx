# cython: boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled column kernels. Same contract as ``_pykernels``."""
import numpy as np
cimport numpy as cnp

cnp.import_array()

ctypedef cnp.int64_t idx_t


cdef Py_ssize_t _merge_xor(const idx_t[::1] a, Py_ssize_t na,
                           const idx_t[::1] b, Py_ssize_t nb,
                           idx_t[::1] out) noexcept nogil:
    cdef Py_ssize_t i = 0, j = 0, k = 0
    while i < na and j < nb:
        if a[i] < b[j]:
            out[k] = a[i]
            i += 1
            k += 1
        elif a[i] > b[j]:
            out[k] = b[j]
            j += 1
            k += 1
        else:
            i += 1
            j += 1
    while i < na:
        out[k] = a[i]
        i += 1
        k += 1
    while j < nb:
        out[k] = b[j]
        j += 1
        k += 1
    return k


def xor_columns(a, b):
    cdef const idx_t[::1] av = np.ascontiguousarray(a, dtype=np.int64)
    cdef const idx_t[::1] bv = np.ascontiguousarray(b, dtype=np.int64)
    out = np.empty(av.shape[0] + bv.shape[0], dtype=np.int64)
    cdef idx_t[::1] ov = out
    cdef Py_ssize_t k = _merge_xor(av, av.shape[0], bv, bv.shape[0], ov)
    return out[:k].copy()


def reduce_column(col, idx_t lo, list slots, list trace=None):
    cdef Py_ssize_t n_slots = len(slots)
    cdef Py_ssize_t length = len(col)
    cdef Py_ssize_t cap, k, adds = 0
    cdef idx_t piv
    cdef const idx_t[::1] src
    cdef idx_t[::1] cur
    cdef idx_t[::1] nxt
    if length == 0:
        return np.empty(0, dtype=np.int64), 0
    piv = col[length - 1]
    k = piv - lo - 1
    if k < 0 or k >= n_slots or slots[k] is None:
        return np.ascontiguousarray(col, dtype=np.int64), 0
    cap = 2 * length + 16
    buf_a = np.empty(cap, dtype=np.int64)
    buf_b = np.empty(cap, dtype=np.int64)
    buf_a[:length] = col
    cur = buf_a
    nxt = buf_b
    while length > 0:
        piv = cur[length - 1]
        k = piv - lo - 1
        if k < 0 or k >= n_slots:
            break
        obj = slots[k]
        if obj is None:
            break
        src = obj
        if length + src.shape[0] > nxt.shape[0]:
            cap = 2 * (length + src.shape[0])
            fresh = np.empty(cap, dtype=np.int64)
            fresh[:length] = np.asarray(cur)[:length]
            cur = fresh
            nxt = np.empty(cap, dtype=np.int64)
        length = _merge_xor(cur, length, src, src.shape[0], nxt)
        cur, nxt = nxt, cur
        adds += 1
        if trace is not None:
            trace.append(piv)
    return np.asarray(cur)[:length].copy(), adds
