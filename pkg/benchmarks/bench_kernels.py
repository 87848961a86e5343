"""Compare the compiled and pure-Python kernels.

    python benchmarks/bench_kernels.py [--extents 24] [--repeat 3]

Times the column kernels in isolation, then a full in-process run on a
generated image, once per available backend.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from distpers import kernels
from distpers.block import PivotStore, WorkColumn, WorkSet, reduce_block
from distpers.io import build_cubical, generate_image
from distpers.runtime import run_distributed


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def xor_workload(rng, count=20000, size=40):
    pairs = []
    for _ in range(count):
        a = np.unique(rng.integers(1, 10 * size, size=size))
        b = np.unique(rng.integers(1, 10 * size, size=size))
        pairs.append((a, b))
    return pairs


def bench_xor(pairs):
    xor = kernels.xor_columns
    for a, b in pairs:
        xor(a, b)


def bench_block(matrix):
    """The whole matrix as one block, i.e. a standard reduction through the kernel."""
    store = PivotStore(1, 0, matrix.n)
    cols = [WorkColumn(j, matrix.dim(j), matrix.column(j).copy()) for j in range(1, matrix.n + 1)]
    reduce_block(store, WorkSet(1, cols))


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--extents", type=int, default=24)
    ap.add_argument("--nodes", type=int, default=4)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    pairs = xor_workload(rng)
    e = args.extents
    matrix, _ = build_cubical(generate_image((e, e, e), 1, 2.0))
    print(f"image {e}^3, {matrix.n} cells, {matrix.nnz()} entries; backends: {sorted(kernels.BACKENDS)}")

    rows = []
    for name in sorted(kernels.BACKENDS):
        with kernels.use_backend(name):
            rows.append((
                name,
                best_of(lambda: bench_xor(pairs), args.repeat),
                best_of(lambda: bench_block(matrix), args.repeat),
                best_of(lambda: run_distributed(matrix, args.nodes), args.repeat),
            ))
    print(f"{'backend':<8} {'xor 20k':>10} {'1 block':>10} {f'p={args.nodes} run':>10}")
    for name, a, b, c in rows:
        print(f"{name:<8} {a:>9.3f}s {b:>9.3f}s {c:>9.3f}s")
    if len(rows) == 2:
        (_, *slow), (_, *fast) = sorted(rows, key=lambda r: r[0] != "python")
        print("speedup  " + " ".join(f"{s / f:>9.2f}x" for s, f in zip(slow, fast)))


if __name__ == "__main__":
    main()
