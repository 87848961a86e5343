"""Blocking neighbour-to-neighbour package transport.

Node i only ever sends to i-1 and receives from i+1.  ``send`` returns only
once the receiver has taken the package, so a node never holds more than one
package at a time.
"""
from __future__ import annotations

import queue
import threading
import time
from typing import Protocol

from .monitor import OwnershipMonitor
from .wire import Package, decode_package, encode_package


class TransportError(RuntimeError):
    pass


class ProtocolError(RuntimeError):
    pass


class Transport(Protocol):
    node: int

    def send(self, pkg: Package) -> int:
        """Deliver ``pkg`` to node - 1; return the frame size in bytes."""

    def receive(self) -> Package:
        """Take the next package from node + 1."""


_POLL = 0.05


class RendezvousChannel:
    """Capacity-1 channel whose ``send`` blocks until the item is taken."""

    def __init__(self, network: "InProcessNetwork"):
        self._net = network
        self._slot: queue.Queue = queue.Queue(maxsize=1)
        self._ack: queue.Queue = queue.Queue(maxsize=1)

    def _wait(self, op, what: str):
        deadline = time.monotonic() + self._net.timeout
        while True:
            if self._net.aborted.is_set():
                raise TransportError(f"run aborted while waiting to {what}")
            try:
                return op()
            except (queue.Full, queue.Empty):
                if time.monotonic() > deadline:
                    raise TransportError(f"timed out waiting to {what}") from None

    def send(self, item) -> None:
        self._wait(lambda: self._slot.put(item, timeout=_POLL), "send")
        self._wait(lambda: self._ack.get(timeout=_POLL), "be acknowledged")

    def receive(self, on_take=None):
        item = self._wait(lambda: self._slot.get(timeout=_POLL), "receive")
        if on_take is not None:
            on_take(item)
        self._ack.put(None)
        return item


class InProcessNetwork:
    """Channels for edges (i+1 -> i) between p node workers in one process."""

    def __init__(self, p: int, timeout: float = 600.0, monitor: OwnershipMonitor | None = None):
        self.p = p
        self.timeout = timeout
        self.monitor = monitor
        self.aborted = threading.Event()
        self._channels = {i: RendezvousChannel(self) for i in range(1, p)}

    def endpoint(self, i: int) -> "InProcessTransport":
        return InProcessTransport(self, i)

    def abort(self) -> None:
        self.aborted.set()


class InProcessTransport:
    def __init__(self, network: InProcessNetwork, node: int):
        self.net = network
        self.node = node

    def send(self, pkg: Package) -> int:
        if self.node == 1:
            raise ProtocolError("node 1 has no downstream neighbour")
        frame = encode_package(pkg)
        self.net._channels[self.node - 1].send((frame, pkg.indices()))
        return len(frame)

    def receive(self) -> Package:
        if self.node == self.net.p:
            raise ProtocolError(f"node {self.node} has no upstream neighbour")
        mon = self.net.monitor
        src, dst = self.node + 1, self.node

        def take(item):
            if mon is not None:
                mon.on_transfer(src, dst, item[1])

        frame, _ = self.net._channels[self.node].receive(take)
        return decode_package(frame)
