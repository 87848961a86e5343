import socket
import threading

import numpy as np
import pytest

from distpers.block import make_partition
from distpers.io import build_cubical
from distpers.oracle import standard_reduce
from distpers.runtime import Package, ProtocolError, TransportError, run_distributed
from distpers.runtime.sockets import SocketTransport, parse_peers, run_socket_node


def free_peers(p):
    socks = [socket.socket() for _ in range(p)]
    for s in socks:
        s.bind(("127.0.0.1", 0))
    peers = [("127.0.0.1", s.getsockname()[1]) for s in socks]
    for s in socks:
        s.close()
    return peers


def run_all(target, p):
    results, errors = {}, {}

    def work(rank):
        try:
            results[rank] = target(rank)
        except BaseException as exc:  # noqa: BLE001
            errors[rank] = exc

    threads = [threading.Thread(target=work, args=(r,)) for r in range(1, p + 1)]
    for t in threads:
        t.start()
    for t in threads:
        t.join(60)
    return results, errors


@pytest.mark.parametrize("p", [1, 2, 4])
def test_socket_run_matches_oracle(p):
    m, _ = build_cubical(np.random.default_rng(p).integers(0, 6, size=(5, 4, 6)).astype(float))
    part = make_partition(m.n, p)
    peers = free_peers(p)
    results, errors = run_all(
        lambda r: run_socket_node(r, m, part, peers, timeout=30, connect_timeout=10), p
    )
    assert not errors
    res = results[1]
    assert res.diagram == standard_reduce(m).diagram()
    assert all(results[r] is None for r in range(2, p + 1))
    assert res.report["total_messages"] == sum(p - i + 1 for i in range(2, p + 1)) * m.max_dim


def test_socket_and_inprocess_reports_agree(triangle):
    part = make_partition(triangle.n, 2)
    peers = free_peers(2)
    results, errors = run_all(lambda r: run_socket_node(r, triangle, part, peers, timeout=10), 2)
    assert not errors
    local = run_distributed(triangle, 2)
    assert results[1].diagram == local.diagram
    assert results[1].report["total_bytes"] == local.report["total_bytes"] == 78



def _open_pair(part, peers, versions=(None, None), bounds2=None):
    def open_rank(r):
        v = versions[r - 1]
        pt = part if r == 1 or bounds2 is None else bounds2
        kw = {} if v is None else {"version": v}
        return SocketTransport(r, pt, peers, timeout=5, connect_timeout=5, **kw).open()

    return run_all(open_rank, 2)


def test_version_mismatch():
    part = make_partition(7, 2)
    results, errors = _open_pair(part, free_peers(2), versions=(None, 7))
    assert isinstance(errors[1], ProtocolError) and "version mismatch" in str(errors[1])
    assert isinstance(errors[2], ProtocolError)
    for t in results.values():
        t.close()


def test_partition_mismatch():
    results, errors = _open_pair(make_partition(7, 2), free_peers(2), bounds2=make_partition(8, 2))
    assert "handshake mismatch" in str(errors[1])
    assert isinstance(errors[2], ProtocolError)
    for t in results.values():
        t.close()


def test_peer_disconnect_surfaces():
    part = make_partition(7, 2)
    results, errors = _open_pair(part, free_peers(2))
    assert not errors
    results[2].close()
    with pytest.raises(TransportError, match="disconnected"):
        results[1].receive()
    results[1].close()


def test_send_waits_for_ack():
    part = make_partition(7, 2)
    results, errors = _open_pair(part, free_peers(2))
    assert not errors
    down, up = results[2], results[1]
    pkg = Package(2, [])
    got = []
    t = threading.Thread(target=lambda: got.append(up.receive()))
    t.start()
    assert down.send(pkg) == 22
    t.join(5)
    assert got == [pkg]
    down.close()
    up.close()


def test_end_nodes_have_one_direction():
    part = make_partition(7, 2)
    results, errors = _open_pair(part, free_peers(2))
    with pytest.raises(ProtocolError):
        results[1].send(Package(1))
    with pytest.raises(ProtocolError):
        results[2].receive()
    for t in results.values():
        t.close()


def test_parse_peers():
    assert parse_peers("a:1, b:22") == [("a", 1), ("b", 22)]
    with pytest.raises(ValueError):
        parse_peers("nohost")
