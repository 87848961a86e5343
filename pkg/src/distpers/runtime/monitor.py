"""Instrumentation for in-process runs: column ownership, held packages, topology."""
from __future__ import annotations

import threading
from collections import Counter

from ..block import ConsistencyError


class OwnershipMonitor:
    """Tracks which node owns each loaded column index.

    Every hook runs under one lock and raises ``ConsistencyError`` on the first
    violation, which aborts the run.
    """

    def __init__(self):
        self._lock = threading.Lock()
        self.owner: dict[int, int] = {}
        self.held: Counter[int] = Counter()
        self.max_held = 0
        self.edges: Counter[tuple[int, int]] = Counter()
        self.blocks: list[tuple[int, int, int]] = []  # (dim, i, j) in completion order
        self.steps = 0

    def on_load(self, node: int, indices) -> None:
        with self._lock:
            self.steps += 1
            for idx in indices:
                if idx in self.owner:
                    raise ConsistencyError(
                        f"column {idx} loaded by node {node} but already owned by {self.owner[idx]}"
                    )
                self.owner[idx] = node

    def on_transfer(self, src: int, dst: int, indices) -> None:
        with self._lock:
            self.steps += 1
            self.edges[(src, dst)] += 1
            if dst != src - 1:
                raise ConsistencyError(f"message on non-neighbour edge {src}->{dst}")
            for idx in indices:
                prev = self.owner.get(idx)
                if prev != src:
                    raise ConsistencyError(f"column {idx} sent by node {src} but owned by {prev}")
                self.owner[idx] = dst
            self.held[dst] += 1
            self.max_held = max(self.max_held, self.held[dst])
            if self.held[dst] > 1:
                raise ConsistencyError(f"node {dst} holds {self.held[dst]} packages")

    def on_release(self, node: int) -> None:
        with self._lock:
            self.steps += 1
            if self.held[node] < 1:
                raise ConsistencyError(f"node {node} released a package it does not hold")
            self.held[node] -= 1

    def on_block(self, dim: int, i: int, j: int) -> None:
        with self._lock:
            self.blocks.append((dim, i, j))

    def owned_by(self, node: int) -> set[int]:
        return {idx for idx, n in self.owner.items() if n == node}
