"""Run all p nodes as threads of this process over rendezvous channels."""
from __future__ import annotations

import threading
from dataclasses import dataclass

from ..block import RangePartition, make_partition
from ..matrix import BoundaryMatrix
from ..oracle import PersistenceDiagram
from .gather import gather_results
from .metrics import MetricsLedger, build_report
from .monitor import OwnershipMonitor
from .node import MatrixProvider, NodeOutput, run_node
from .transport import InProcessNetwork, TransportError


class RunError(RuntimeError):
    pass


@dataclass
class DistributedRun:
    diagram: PersistenceDiagram
    outputs: list[NodeOutput]
    report: dict
    partition: RangePartition
    monitor: OwnershipMonitor | None = None


def run_distributed(
    matrix: BoundaryMatrix,
    p: int,
    *,
    partition: RangePartition | None = None,
    clearing: bool = True,
    instrument: bool = False,
    timeout: float = 600.0,
) -> DistributedRun:
    """Reduce ``matrix`` on ``p`` in-process nodes and merge their results."""
    partition = partition or make_partition(matrix.n, p)
    if partition.p != p:
        raise ValueError("partition does not have p ranges")
    monitor = OwnershipMonitor() if instrument else None
    net = InProcessNetwork(p, timeout=timeout, monitor=monitor)
    provider = MatrixProvider(matrix, partition)
    outputs: list[NodeOutput | None] = [None] * p
    errors: list[tuple[int, BaseException]] = []

    def work(i: int) -> None:
        try:
            outputs[i - 1] = run_node(
                i, partition, net.endpoint(i), provider, clearing=clearing, monitor=monitor
            )
        except BaseException as exc:  # noqa: BLE001 - re-raised in the caller
            errors.append((i, exc))
            net.abort()

    if p == 1:
        work(1)
    else:
        threads = [threading.Thread(target=work, args=(i,), name=f"node-{i}") for i in range(1, p + 1)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
    if errors:
        # a node failing on its own beats the TransportErrors it caused elsewhere
        errors.sort(key=lambda e: (isinstance(e[1], TransportError), e[0]))
        node, exc = errors[0]
        raise RunError(f"node {node} failed: {exc}") from exc

    reports = [o.report() for o in outputs]
    diagram = gather_results(reports, matrix.dims)
    report = build_report(matrix.n, partition.bounds, [o.metrics for o in outputs])
    return DistributedRun(diagram, outputs, report, partition, monitor)


def ledgers_from_report(report: dict) -> list[MetricsLedger]:
    return [MetricsLedger.from_dict(d) for d in report["per_node"]]
