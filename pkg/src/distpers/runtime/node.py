"""The per-node pipeline loop with per-dimension clearing."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..block import ConsistencyError, PivotStore, RangePartition, WorkColumn, WorkSet, reduce_block
from .metrics import MetricsLedger
from .monitor import OwnershipMonitor
from .transport import ProtocolError, Transport
from .wire import NodeReport, Package

log = logging.getLogger(__name__)


class MatrixProvider:
    """Serves the columns of one range and one dimension out of a boundary matrix.

    Works with anything exposing ``dims``, ``offsets`` and ``rows`` arrays, which
    includes memory-mapped matrix files.
    """

    def __init__(self, matrix, partition: RangePartition):
        if len(matrix.dims) != partition.n:
            raise ValueError(f"partition covers {partition.n} cells, matrix has {len(matrix.dims)}")
        self.matrix = matrix
        self.partition = partition
        self.max_dim = int(np.max(matrix.dims)) if len(matrix.dims) else 0

    def columns(self, i: int, dim: int, skip=frozenset()) -> tuple[list[WorkColumn], list[int]]:
        """Columns of range i with dimension ``dim``; those in ``skip`` are only listed."""
        lo, hi = self.partition.lo(i), self.partition.hi(i)
        m = self.matrix
        sel = np.nonzero(np.asarray(m.dims[lo:hi]) == dim)[0] + lo + 1
        cols, skipped = [], []
        for j in sel.tolist():
            if j in skip:
                skipped.append(j)
                continue
            rows = np.array(m.rows[m.offsets[j - 1]:m.offsets[j]], dtype=np.int64)
            cols.append(WorkColumn(j, dim, rows))
        return cols, skipped


@dataclass
class NodeOutput:
    node: int
    store: PivotStore
    zeros: list[tuple[int, int]]
    cleared: set[int]
    metrics: MetricsLedger
    clearing: bool = True
    block_log: list[tuple[int, int]] = field(default_factory=list)

    def report(self) -> NodeReport:
        return NodeReport(
            self.node,
            self.store.pairs(),
            sorted(self.zeros),
            sorted(self.cleared),
            self.clearing,
            self.metrics.to_dict(),
        )


def run_node(
    i: int,
    partition: RangePartition,
    transport: Transport,
    provider: MatrixProvider,
    *,
    clearing: bool = True,
    monitor: OwnershipMonitor | None = None,
) -> NodeOutput:
    """Reduce row range i for every dimension, highest first.

    Per dimension the node loads its own columns, drops those cleared by the
    previous dimension, then walks blocks (i, i) .. (i, p): reduce, pass the
    residual down to node i-1, take range j+1 from node i+1.
    """
    p = partition.p
    store = PivotStore.for_range(partition, i)
    metrics = MetricsLedger(i)
    zeros: list[tuple[int, int]] = []
    cleared: set[int] = set()
    out = NodeOutput(i, store, zeros, cleared, metrics, clearing)

    for d in range(provider.max_dim, 0, -1):
        cols, skipped = provider.columns(i, d, cleared if clearing else frozenset())
        if monitor is not None:
            monitor.on_load(i, [c.index for c in cols] + skipped)
        work = WorkSet(i, cols)
        holding = False
        metrics.record_resident(len(store) + len(work))
        new_pivots: list[int] = []
        for j in range(i, p + 1):
            res = reduce_block(store, work)
            metrics.additions += res.additions
            zeros.extend(res.zeros)
            new_pivots.extend(res.pivots)
            out.block_log.append((d, j))
            if monitor is not None:
                monitor.on_block(d, i, j)
            if i > 1:
                size = transport.send(Package(j, res.residual.columns))
                metrics.record_send(i - 1, d, size)
            elif res.residual.columns:
                raise ConsistencyError(
                    f"node 1 left {len(res.residual)} columns of range {j} unreduced"
                )
            if holding and monitor is not None:
                monitor.on_release(i)
            holding = False
            if j < p:
                pkg = transport.receive()
                if pkg.column_range != j + 1:
                    raise ProtocolError(
                        f"node {i} expected range {j + 1} in dimension {d}, got {pkg.column_range}"
                    )
                if any(c.dim != d for c in pkg.columns):
                    raise ProtocolError(f"node {i} received columns outside dimension {d}")
                metrics.received += 1
                work = WorkSet(j + 1, pkg.columns)
                holding = True
                metrics.record_resident(len(store) + len(work))
        if clearing:
            cleared.update(new_pivots)
        log.debug("node %d finished dimension %d: %d stored", i, d, len(store))
    return out
