"""TCP transport: one node per process, static peer list, neighbour links only.

Frames travel as a u64 little-endian length followed by the frame bytes; the
receiver answers every frame with a single ACK byte, so ``send`` returns only
after the peer has taken the package.  On connect, node i sends a DHSK frame to
node i-1, which checks protocol version, p, n and partition bounds.
"""
from __future__ import annotations

import logging
import socket
import struct
import time
from dataclasses import dataclass

from ..block import RangePartition
from ..oracle import PersistenceDiagram
from .gather import gather_results
from .metrics import MetricsLedger, build_report
from .node import MatrixProvider, run_node
from .transport import ProtocolError, TransportError
from .wire import (
    VERSION,
    DecodeError,
    Handshake,
    NodeReport,
    Package,
    decode_handshake,
    decode_package,
    decode_report,
    encode_handshake,
    encode_package,
    encode_report,
)

log = logging.getLogger(__name__)

ACK = b"\x06"
NAK = b"\x15"
_LEN = struct.Struct("<Q")


def parse_peers(text: str) -> list[tuple[str, int]]:
    peers = []
    for item in text.split(","):
        host, _, port = item.strip().rpartition(":")
        if not host or not port.isdigit():
            raise ValueError(f"peer {item!r} is not host:port")
        peers.append((host, int(port)))
    return peers


def _recv_exact(sock: socket.socket, size: int) -> bytes:
    buf = bytearray()
    while len(buf) < size:
        chunk = sock.recv(min(size - len(buf), 1 << 20))
        if not chunk:
            raise TransportError("peer disconnected")
        buf += chunk
    return bytes(buf)


class SocketTransport:
    def __init__(
        self,
        rank: int,
        partition: RangePartition,
        peers: list[tuple[str, int]],
        *,
        timeout: float = 600.0,
        connect_timeout: float = 30.0,
        version: int = VERSION,
    ):
        if len(peers) != partition.p:
            raise ValueError(f"need {partition.p} peer addresses, got {len(peers)}")
        if not 1 <= rank <= partition.p:
            raise ValueError(f"rank {rank} outside 1..{partition.p}")
        self.node = rank
        self.partition = partition
        self.peers = peers
        self.timeout = timeout
        self.connect_timeout = connect_timeout
        self.version = version
        self._listener: socket.socket | None = None
        self.down: socket.socket | None = None  # to node - 1
        self.up: socket.socket | None = None  # from node + 1

    def open(self) -> "SocketTransport":
        p, i = self.partition.p, self.node
        try:
            if i < p:
                self._listener = socket.create_server(self.peers[i - 1], reuse_port=False)
                self._listener.settimeout(self.connect_timeout)
            if i > 1:
                self._connect_down()
            if i < p:
                self._accept_up()
        except OSError as exc:
            self.close()
            raise TransportError(f"node {i}: connection setup failed: {exc}") from exc
        return self

    def _connect_down(self) -> None:
        addr = self.peers[self.node - 2]
        deadline = time.monotonic() + self.connect_timeout
        while True:
            try:
                self.down = socket.create_connection(addr, timeout=self.connect_timeout)
                break
            except OSError:
                if time.monotonic() > deadline:
                    raise
                time.sleep(0.05)
        self.down.settimeout(self.timeout)
        hs = Handshake(self.partition.p, self.node, self.partition.n, self.partition.bounds, self.version)
        self._send_frame(self.down, encode_handshake(hs))
        reply = _recv_exact(self.down, 1)
        if reply != ACK:
            raise ProtocolError(f"node {self.node - 1} rejected handshake (protocol mismatch)")

    def _accept_up(self) -> None:
        conn, _ = self._listener.accept()
        conn.settimeout(self.timeout)
        try:
            hs = decode_handshake(self._recv_frame(conn))
        except DecodeError as exc:
            conn.sendall(NAK)
            raise ProtocolError(f"bad handshake: {exc}") from exc
        want = (VERSION, self.partition.p, self.node + 1, self.partition.n, self.partition.bounds)
        got = (hs.version, hs.p, hs.i, hs.n, hs.bounds)
        if got != want:
            conn.sendall(NAK)
            conn.close()
            if hs.version != VERSION:
                raise ProtocolError(f"protocol version mismatch: peer {hs.version}, local {VERSION}")
            raise ProtocolError(f"handshake mismatch: expected {want}, got {got}")
        conn.sendall(ACK)
        self.up = conn
        self._listener.close()
        self._listener = None

    def _send_frame(self, sock: socket.socket, frame: bytes) -> None:
        try:
            sock.sendall(_LEN.pack(len(frame)) + frame)
        except OSError as exc:
            raise TransportError(f"send failed: {exc}") from exc

    def _recv_frame(self, sock: socket.socket) -> bytes:
        try:
            (size,) = _LEN.unpack(_recv_exact(sock, _LEN.size))
            return _recv_exact(sock, size)
        except OSError as exc:
            raise TransportError(f"receive failed: {exc}") from exc

    def send_frame(self, frame: bytes) -> int:
        if self.down is None:
            raise ProtocolError(f"node {self.node} has no downstream link")
        self._send_frame(self.down, frame)
        try:
            reply = _recv_exact(self.down, 1)
        except OSError as exc:
            raise TransportError(f"no acknowledgment: {exc}") from exc
        if reply != ACK:
            raise ProtocolError("peer refused frame")
        return len(frame)

    def receive_frame(self) -> bytes:
        if self.up is None:
            raise ProtocolError(f"node {self.node} has no upstream link")
        frame = self._recv_frame(self.up)
        try:
            self.up.sendall(ACK)
        except OSError as exc:
            raise TransportError(f"acknowledge failed: {exc}") from exc
        return frame

    def send(self, pkg: Package) -> int:
        return self.send_frame(encode_package(pkg))

    def receive(self) -> Package:
        return decode_package(self.receive_frame())

    def close(self) -> None:
        for s in (self._listener, self.down, self.up):
            if s is not None:
                s.close()
        self._listener = self.down = self.up = None


@dataclass
class SocketRunResult:
    """Returned on node 1 only; other ranks get None."""

    diagram: PersistenceDiagram
    reports: list[NodeReport]
    report: dict


def run_socket_node(
    rank: int,
    matrix,
    partition: RangePartition,
    peers: list[tuple[str, int]],
    *,
    clearing: bool = True,
    timeout: float = 600.0,
    connect_timeout: float = 30.0,
) -> SocketRunResult | None:
    """Run one node; afterwards node reports are forwarded down to node 1."""
    transport = SocketTransport(rank, partition, peers, timeout=timeout, connect_timeout=connect_timeout)
    transport.open()
    try:
        out = run_node(rank, partition, transport, MatrixProvider(matrix, partition), clearing=clearing)
        reports = [out.report()]
        for _ in range(partition.p - rank):
            reports.append(decode_report(transport.receive_frame()))
        if rank > 1:
            for rep in reports:
                transport.send_frame(encode_report(rep))
            return None
    finally:
        transport.close()
    diagram = gather_results(reports, matrix.dims)
    ledgers = [MetricsLedger.from_dict(r.metrics) for r in reports]
    return SocketRunResult(diagram, reports, build_report(partition.n, partition.bounds, ledgers))
