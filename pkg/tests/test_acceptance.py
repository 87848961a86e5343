"""Acceptance gate: each test carries the criterion it checks; see the summary section."""
import random
import time
from collections import deque

import numpy as np
import pytest

from distpers.io import build_cubical, cell_count, cubical_filtration, generate_image
from distpers.oracle import INFINITE, betti_numbers, standard_reduce, twist_reduce
from distpers.runtime import run_distributed
from distpers.cli import main
from oracles import random_chain_complex

P_VALUES = (1, 2, 3, 4, 8)


def build_corpus(seed=2024, count=100):
    """Half random images up to 16^3, half random chain complexes with n <= 300."""
    rng = random.Random(seed)
    corpus = []
    for k in range(count):
        if k % 2 == 0:
            shape = tuple(rng.randint(1, 16) for _ in range(3))
            levels = rng.choice([3, 10, 1000])
            img = np.random.default_rng(rng.getrandbits(32)).integers(0, levels, size=shape).astype(float)
            corpus.append((f"image {shape}", build_cubical(img)[0]))
        else:
            n = rng.randint(1, 300)
            corpus.append((f"complex n={n}", random_chain_complex(n, rng)))
    return corpus


@pytest.fixture(scope="module")
def corpus():
    return build_corpus()


@pytest.fixture(scope="module")
def references(corpus):
    return [standard_reduce(m).diagram() for _, m in corpus]


@pytest.mark.criterion(1, "distributed runtime equals the standard reduction on 100 inputs, p in {1,2,3,4,8}")
def test_oracle_equivalence(corpus, references):
    start = time.perf_counter()
    checked = 0
    for (name, m), ref in zip(corpus, references):
        for p in P_VALUES:
            if p > m.n:
                continue
            got = run_distributed(m, p).diagram
            assert got == ref, f"{name}, p={p}"
            checked += 1
    elapsed = time.perf_counter() - start
    assert len(corpus) == 100 and checked >= 400
    assert elapsed < 60, f"took {elapsed:.1f} s"


@pytest.mark.criterion(2, "twist reduction equals the standard reduction on the same corpus")
def test_clearing_equivalence(corpus, references):
    for (name, m), ref in zip(corpus, references):
        assert twist_reduce(m).diagram() == ref, name


def instrumented_inputs():
    rng = np.random.default_rng(3)
    yield build_cubical(rng.integers(0, 4, size=(6, 5, 7)).astype(float))[0]
    yield build_cubical(generate_image((8, 8, 8), 5, 2.0))[0]
    yield random_chain_complex(250, random.Random(3))


@pytest.mark.criterion(3, "node i sends exactly p-i+1 packages to node i-1 per dimension")
@pytest.mark.parametrize("p", [2, 3, 4, 8])
def test_message_count_contract(p):
    for m in instrumented_inputs():
        run = run_distributed(m, p, instrument=True)
        for row in run.report["per_node"]:
            i = row["node"]
            want = {} if i == 1 else {str(d): p - i + 1 for d in range(1, m.max_dim + 1)}
            assert row["packages_by_dim"] == want
            assert sum(want.values()) == sum(row["messages"].values())
            assert all(v < p for v in want.values())


@pytest.mark.criterion(4, "neighbour-only messages, single ownership, at most one held package")
@pytest.mark.parametrize("p", [2, 3, 4, 8])
def test_topology_and_ownership(p):
    # the monitor raises inside the run on any violation; these are the end-state checks
    for m in instrumented_inputs():
        run = run_distributed(m, p, instrument=True)
        mon = run.monitor
        assert set(mon.edges) == {(i, i - 1) for i in range(2, p + 1)}
        assert mon.max_held <= 1
        assert all(v == 0 for v in mon.held.values())
        loaded = [j for j in range(1, m.n + 1) if m.dim(j) > 0]
        assert sorted(mon.owner) == loaded
        for out in run.outputs:
            for _, col, _ in out.store.pairs():
                assert mon.owner[col] == out.node
            for idx, _ in out.zeros:
                assert mon.owner[idx] == out.node


@pytest.mark.criterion(5, "cell count (2a-1)(2b-1)(2c-1) for extents in {1..5}^3 and 256^3 -> 511^3")
def test_cell_count():
    for a in range(1, 6):
        for b in range(1, 6):
            for c in range(1, 6):
                m, _ = build_cubical(np.zeros((a, b, c)))
                assert m.n == (2 * a - 1) * (2 * b - 1) * (2 * c - 1)
    assert cell_count((256, 256, 256)) == 511**3


def sublevel_components(img, t):
    """Connected components of {voxel <= t} under 6-adjacency, by breadth-first search."""
    mask = img <= t
    seen = np.zeros_like(mask)
    comps = 0
    for start in zip(*np.nonzero(mask)):
        if seen[start]:
            continue
        comps += 1
        seen[start] = True
        queue = deque([start])
        while queue:
            v = queue.popleft()
            for axis in range(3):
                for step in (-1, 1):
                    w = list(v)
                    w[axis] += step
                    w = tuple(w)
                    if 0 <= w[axis] < img.shape[axis] and mask[w] and not seen[w]:
                        seen[w] = True
                        queue.append(w)
    return comps


def alive_at(diagram, values, dim, t):
    return sum(
        1 for r in diagram.records()
        if r.dim == dim and values[r.birth - 1] <= t
        and (r.death == INFINITE or values[int(r.death) - 1] > t)
    )


@pytest.mark.criterion(6, "constant 4^3 image is contractible; two basins give two classes below the ridge")
def test_known_topology():
    m, _ = build_cubical(np.full((4, 4, 4), 3.0))
    assert betti_numbers(standard_reduce(m), 2) == [1, 0, 0]
    assert betti_numbers(twist_reduce(m), 2) == [1, 0, 0]
    assert run_distributed(m, 4).diagram == standard_reduce(m).diagram()

    img = np.full((4, 4, 4), 2.0)
    img[2, :, :] = 10.0  # ridge plane
    img[0, 1, 1] = 0.0  # left basin floor
    img[3, 2, 2] = 1.0  # right basin floor
    f = cubical_filtration(img)
    diagrams = [standard_reduce(f.matrix).diagram()] + [
        run_distributed(f.matrix, p).diagram for p in (2, 4)
    ]
    for t in (1.0, 2.0, 5.0):
        want = sublevel_components(img, t)
        for d in diagrams:
            assert alive_at(d, f.values, 0, t) == want
    assert sublevel_components(img, 5.0) == 2
    assert alive_at(diagrams[0], f.values, 0, 5.0) == 2
    assert alive_at(diagrams[0], f.values, 0, 10.0) == 1


@pytest.mark.criterion(7, "DPKG and DBND round trips (1000 cases) and truncation always rejected")
def test_codecs(tmp_path):
    from test_io import test_matrix_file_truncation, test_randomized_matrix_roundtrips
    from test_wire import test_every_truncation_fails, test_randomized_roundtrips

    test_randomized_roundtrips()
    test_every_truncation_fails()
    test_randomized_matrix_roundtrips(tmp_path)
    test_matrix_file_truncation(tmp_path)


@pytest.mark.slow
@pytest.mark.criterion(8, "48^3 image: peak resident columns non-increasing in p, p=8 at most 0.35x p=1")
def test_memory_scaling():
    m, _ = build_cubical(generate_image((48, 48, 48), 11, 2.0))
    peaks, diagrams = [], []
    for p in (1, 2, 4, 8):
        run = run_distributed(m, p)
        peaks.append(run.report["max_peak_columns"])
        diagrams.append(run.diagram)
    assert all(b <= a for a, b in zip(peaks, peaks[1:])), peaks
    assert peaks[-1] <= 0.35 * peaks[0], peaks
    assert all(d == diagrams[0] for d in diagrams[1:])


@pytest.mark.criterion(9, "repeated in-process runs give identical pairs files and metrics reports")
def test_determinism(tmp_path):
    img = tmp_path / "g.img"
    main(["generate", "--extents", "12", "12", "12", "--seed", "9", "-o", str(img)])
    blobs = set()
    for k in range(3):
        pairs, metrics = tmp_path / f"p{k}", tmp_path / f"m{k}"
        assert main(["compute", "--input", str(img), "--output", str(pairs), "--mode", "dist",
                     "--nodes", "4", "--metrics-out", str(metrics), "--binary"]) == 0
        blobs.add((pairs.read_bytes(), metrics.read_bytes()))
    assert len(blobs) == 1
