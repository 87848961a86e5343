"""Per-node communication and memory counters, and the run report built from them."""
from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field


@dataclass
class MetricsLedger:
    node: int
    messages: dict[int, int] = field(default_factory=lambda: defaultdict(int))
    bytes: dict[int, int] = field(default_factory=lambda: defaultdict(int))
    packages_by_dim: dict[int, int] = field(default_factory=lambda: defaultdict(int))
    max_package_bytes: int = 0
    peak_columns: int = 0
    received: int = 0
    additions: int = 0

    def record_send(self, dest: int, dim: int, size: int) -> None:
        self.messages[dest] += 1
        self.bytes[dest] += size
        self.packages_by_dim[dim] += 1
        self.max_package_bytes = max(self.max_package_bytes, size)

    def record_resident(self, count: int) -> None:
        self.peak_columns = max(self.peak_columns, count)

    def to_dict(self) -> dict:
        return {
            "node": self.node,
            "messages": {str(k): v for k, v in sorted(self.messages.items())},
            "bytes": {str(k): v for k, v in sorted(self.bytes.items())},
            "packages_by_dim": {str(k): v for k, v in sorted(self.packages_by_dim.items())},
            "max_package_bytes": self.max_package_bytes,
            "peak_columns": self.peak_columns,
            "received": self.received,
            "additions": self.additions,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MetricsLedger":
        led = cls(int(d["node"]))
        for key in ("messages", "bytes", "packages_by_dim"):
            getattr(led, key).update({int(k): int(v) for k, v in d[key].items()})
        led.max_package_bytes = int(d["max_package_bytes"])
        led.peak_columns = int(d["peak_columns"])
        led.received = int(d["received"])
        led.additions = int(d["additions"])
        return led


def build_report(n: int, bounds: tuple[int, ...], ledgers: list[MetricsLedger]) -> dict:
    """Run summary: total bytes, worst node pair, largest package, peak residency."""
    ledgers = sorted(ledgers, key=lambda m: m.node)
    edge_bytes = [b for m in ledgers for b in m.bytes.values()]
    return {
        "n": n,
        "nodes": len(bounds) - 1,
        "bounds": list(bounds),
        "per_node": [m.to_dict() for m in ledgers],
        "total_messages": sum(sum(m.messages.values()) for m in ledgers),
        "total_bytes": sum(edge_bytes),
        "max_pair_bytes": max(edge_bytes, default=0),
        "max_package_bytes": max((m.max_package_bytes for m in ledgers), default=0),
        "max_peak_columns": max((m.peak_columns for m in ledgers), default=0),
    }


def dump_report(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"
