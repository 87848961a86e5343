"""Backend selection for the column kernels.

The compiled extension is used when importable; ``DISTPERS_BACKEND=python``
forces the pure-Python fallback.  ``use_backend`` switches at runtime, which
the test-suite uses to run both backends against each other.
"""
from __future__ import annotations

import os
from contextlib import contextmanager
from types import ModuleType

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

BACKENDS: dict[str, ModuleType] = {"python": _pykernels}
if _ckernels is not None:
    BACKENDS["cython"] = _ckernels

_default = os.environ.get("DISTPERS_BACKEND") or ("cython" if _ckernels else "python")
if _default not in BACKENDS:
    raise ImportError(f"kernel backend {_default!r} unavailable; have {sorted(BACKENDS)}")

backend: str = _default
xor_columns = BACKENDS[backend].xor_columns
reduce_column = BACKENDS[backend].reduce_column


def set_backend(name: str) -> None:
    global backend, xor_columns, reduce_column
    mod = BACKENDS[name]
    backend = name
    xor_columns = mod.xor_columns
    reduce_column = mod.reduce_column


@contextmanager
def use_backend(name: str):
    previous = backend
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)
