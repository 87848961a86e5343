import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from distpers.block import (
    ConsistencyError,
    PivotStore,
    RangePartition,
    WorkColumn,
    WorkSet,
    independent,
    make_partition,
    reduce_block,
    respects_order,
    scheduling_order,
)
from distpers.oracle import standard_reduce
from oracles import random_valid_matrix


def work(m, range_index, indices):
    return WorkSet(range_index, [WorkColumn(j, m.dim(j), m.column(j).copy()) for j in indices])


@pytest.mark.parametrize(
    "n,p,bounds",
    [(7, 2, (0, 4, 7)), (10, 5, (0, 2, 4, 6, 8, 10)), (5, 1, (0, 5)), (3, 3, (0, 1, 2, 3))],
)
def test_make_partition(n, p, bounds):
    part = make_partition(n, p)
    assert part.bounds == bounds
    assert part.p == p and part.n == n


@pytest.mark.parametrize("n,p", [(3, 0), (3, 4), (0, 1)])
def test_make_partition_rejects(n, p):
    with pytest.raises(ValueError):
        make_partition(n, p)


@given(st.integers(1, 2000), st.data())
def test_partition_covers_every_index_once(n, data):
    p = data.draw(st.integers(1, min(n, 64)))
    part = make_partition(n, p)
    sizes = np.diff(part.bounds)
    assert sizes.min() >= 1 and sizes.max() - sizes.min() <= 1
    j = data.draw(st.integers(1, n))
    i = part.range_of(j)
    assert part.lo(i) < j <= part.hi(i)


def test_bad_bounds():
    with pytest.raises(ValueError):
        RangePartition((0, 3, 3))
    with pytest.raises(ValueError):
        RangePartition((1, 3))


def test_diagonal_block_on_triangle(triangle):
    store = PivotStore(2, 4, 7)
    res = reduce_block(store, work(triangle, 2, [5, 6, 7]))
    assert res.stored == [7] and res.pivots == [6]
    assert res.residual.indices() == [5, 6]
    assert res.zeros == [] and res.additions == 0
    assert store.owner(6) == 7 and list(store.column(6)) == [4, 5, 6]


def test_off_diagonal_block_on_triangle(triangle):
    store = PivotStore(1, 0, 4)
    store.insert(4, triangle.column(4).copy(), 1)
    trace = []
    res = reduce_block(store, work(triangle, 2, [5, 6]), trace)
    assert res.stored == [5] and res.pivots == [3]
    assert res.zeros == [(6, 1)]
    assert trace == [(5, 6), (4, 6)]
    assert res.additions == 2
    assert len(res.residual) == 0
    assert sorted(store.pairs()) == [(2, 4, 1), (3, 5, 1)]


def test_empty_work():
    res = reduce_block(PivotStore(1, 0, 3), WorkSet(1))
    assert res.stored == [] and res.zeros == [] and len(res.residual) == 0


def test_pivot_above_range_is_an_error(triangle):
    with pytest.raises(ConsistencyError, match="above its range"):
        reduce_block(PivotStore(1, 0, 4), work(triangle, 2, [7]))


def test_work_must_be_increasing(triangle):
    with pytest.raises(ConsistencyError):
        reduce_block(PivotStore(1, 0, 4), work(triangle, 2, [6, 5]))


def test_store_collision(triangle):
    store = PivotStore(1, 0, 4)
    store.insert(5, np.array([1, 3]), 1)
    with pytest.raises(ConsistencyError, match="collision"):
        store.insert(6, np.array([2, 3]), 1)
    with pytest.raises(ConsistencyError, match="outside"):
        store.insert(7, np.array([5]), 1)


def single_node_reduce(m):
    store = PivotStore(1, 0, m.n)
    res = reduce_block(store, work(m, 1, range(1, m.n + 1)))
    assert len(res.residual) == 0
    return store, res


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32), st.integers(1, 60))
def test_single_block_matches_standard_reduction(seed, n):
    m = random_valid_matrix(n, random.Random(seed))
    store, res = single_node_reduce(m)
    ref = standard_reduce(m)
    assert sorted((piv, j) for piv, j, _ in store.pairs()) == sorted((p.birth, p.death) for p in ref.pairs)
    for piv, j, _ in store.pairs():
        assert np.array_equal(store.column(piv), ref.reduced.column(j))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32), st.integers(2, 60))
def test_block_outputs_partition_the_work(seed, n):
    rng = random.Random(seed)
    m = random_valid_matrix(n, rng)
    lo = rng.randint(0, n - 1)
    hi = rng.randint(lo + 1, n)
    store = PivotStore(1, lo, hi)
    # columns whose pivot never exceeds hi, i.e. legal input for this row range
    idx = [j for j in range(1, n + 1) if len(m.column(j)) == 0 or m.column(j)[-1] <= hi]
    res = reduce_block(store, work(m, 1, idx))
    out = res.stored + [z for z, _ in res.zeros] + res.residual.indices()
    assert sorted(out) == idx
    for wc in res.residual.columns:
        assert 0 < wc.rows[-1] <= lo
    for piv in res.pivots:
        assert lo < piv <= hi


def test_scheduling_order_small():
    assert scheduling_order(1) == {(1, 1): frozenset()}
    assert scheduling_order(2) == {
        (1, 1): frozenset(),
        (2, 2): frozenset(),
        (1, 2): frozenset({(1, 1), (2, 2)}),
    }
    deps = scheduling_order(3)
    assert len(deps) == 6
    assert deps[(1, 3)] == {(1, 2), (2, 3)}
    assert deps[(2, 3)] == {(2, 2), (3, 3)}


def test_independent_blocks():
    assert independent((1, 2), (2, 3))
    assert independent((2, 3), (1, 2))
    assert not independent((1, 2), (1, 3))
    assert not independent((1, 3), (2, 2))


def test_respects_order():
    assert respects_order([(2, 2), (1, 1), (1, 2)], 2)
    assert not respects_order([(1, 2), (1, 1), (2, 2)], 2)
    assert not respects_order([(1, 1), (2, 2)], 2)
    assert not respects_order([(1, 1), (1, 1), (2, 2), (1, 2)], 2)


def test_scheduling_order_rejects_zero():
    with pytest.raises(ValueError):
        scheduling_order(0)
