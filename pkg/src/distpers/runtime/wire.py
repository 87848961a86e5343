"""Binary frames exchanged between neighbouring nodes (all little-endian).

DPKG  package of unreduced columns:
      magic(4) version u16 range u64 count u64,
      then per column: index u64, dim u16, nrows u64, rows u64[nrows]
DHSK  handshake sent once by node i when it connects to node i-1:
      magic(4) version u16 p u64 i u64 n u64 bounds u64[p+1]
DRES  one node's final report, forwarded down the pipeline to node 1:
      magic(4) version u16 node u64 clearing u8
      npairs u64 (pivot u64, column u64, dim u16)[npairs]
      nzeros u64 (index u64, dim u16)[nzeros]
      ncleared u64 index u64[ncleared]
      metrics_len u64 metrics JSON (utf-8)
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

import numpy as np

from ..block import WorkColumn

VERSION = 1
PKG_MAGIC = b"DPKG"
HSK_MAGIC = b"DHSK"
RES_MAGIC = b"DRES"

_PKG_HEADER = struct.Struct("<4sHQQ")
_COL_HEADER = struct.Struct("<QHQ")
_HSK_HEADER = struct.Struct("<4sHQQQ")
_RES_HEADER = struct.Struct("<4sHQB")
_U64 = struct.Struct("<Q")
_PAIR = np.dtype([("pivot", "<u8"), ("column", "<u8"), ("dim", "<u2")])
_ZERO = np.dtype([("index", "<u8"), ("dim", "<u2")])

PKG_HEADER_SIZE = _PKG_HEADER.size
COL_HEADER_SIZE = _COL_HEADER.size


class DecodeError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


@dataclass
class Package:
    column_range: int
    columns: list[WorkColumn] = field(default_factory=list)

    @property
    def byte_size(self) -> int:
        return PKG_HEADER_SIZE + sum(COL_HEADER_SIZE + 8 * len(c.rows) for c in self.columns)

    def indices(self) -> list[int]:
        return [c.index for c in self.columns]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Package):
            return NotImplemented
        return (
            self.column_range == other.column_range
            and len(self.columns) == len(other.columns)
            and all(
                a.index == b.index and a.dim == b.dim and np.array_equal(a.rows, b.rows)
                for a, b in zip(self.columns, other.columns)
            )
        )


class _Reader:
    def __init__(self, buf: bytes):
        self.buf = memoryview(buf)
        self.off = 0

    def need(self, size: int, what: str) -> int:
        if self.off + size > len(self.buf):
            raise DecodeError(f"truncated {what}", self.off)
        start = self.off
        self.off += size
        return start

    def unpack(self, st: struct.Struct, what: str):
        start = self.need(st.size, what)
        return st.unpack_from(self.buf, start)

    def array(self, dtype, count: int, what: str) -> np.ndarray:
        dtype = np.dtype(dtype)
        if count > len(self.buf):  # guards the multiplication below against absurd counts
            raise DecodeError(f"implausible {what} count {count}", self.off)
        start = self.need(dtype.itemsize * count, what)
        return np.frombuffer(self.buf, dtype=dtype, count=count, offset=start)

    def finish(self) -> None:
        if self.off != len(self.buf):
            raise DecodeError("trailing bytes", self.off)


def _open(buf: bytes, magic: bytes) -> _Reader:
    if len(buf) < 4:
        raise DecodeError("truncated magic", 0)
    if bytes(buf[:4]) != magic:
        raise DecodeError(f"bad magic {bytes(buf[:4])!r}, expected {magic!r}", 0)
    if len(buf) >= 6:
        (version,) = struct.unpack_from("<H", buf, 4)
        if version != VERSION:
            raise DecodeError(f"unsupported version {version}", 4)
    return _Reader(buf)


def encode_package(pkg: Package) -> bytes:
    parts = [_PKG_HEADER.pack(PKG_MAGIC, VERSION, pkg.column_range, len(pkg.columns))]
    for c in pkg.columns:
        parts.append(_COL_HEADER.pack(c.index, c.dim, len(c.rows)))
        parts.append(np.asarray(c.rows, dtype="<u8").tobytes())
    return b"".join(parts)


def decode_package(buf: bytes) -> Package:
    r = _open(buf, PKG_MAGIC)
    _, _, rng, count = r.unpack(_PKG_HEADER, "package header")
    columns = []
    last = 0
    for _ in range(count):
        at = r.off
        index, dim, nrows = r.unpack(_COL_HEADER, "column header")
        if index <= last:
            raise DecodeError("column indices not increasing", at)
        last = index
        rows = r.array("<u8", nrows, "row indices").astype(np.int64)
        if nrows and (rows[0] < 1 or np.any(np.diff(rows) <= 0) or rows[-1] >= index):
            raise DecodeError(f"malformed rows for column {index}", at)
        columns.append(WorkColumn(int(index), int(dim), rows))
    r.finish()
    return Package(int(rng), columns)


@dataclass(frozen=True)
class Handshake:
    p: int
    i: int
    n: int
    bounds: tuple[int, ...]
    version: int = VERSION


def encode_handshake(h: Handshake) -> bytes:
    head = _HSK_HEADER.pack(HSK_MAGIC, h.version, h.p, h.i, h.n)
    return head + np.asarray(h.bounds, dtype="<u8").tobytes()


def decode_handshake(buf: bytes) -> Handshake:
    if len(buf) < 4 or bytes(buf[:4]) != HSK_MAGIC:
        raise DecodeError(f"bad magic {bytes(buf[:4])!r}, expected {HSK_MAGIC!r}", 0)
    # version mismatches are reported by the caller, not rejected here
    r = _Reader(buf)
    _, version, p, i, n = r.unpack(_HSK_HEADER, "handshake header")
    bounds = r.array("<u8", p + 1, "bounds")
    r.finish()
    return Handshake(int(p), int(i), int(n), tuple(int(b) for b in bounds), int(version))


@dataclass
class NodeReport:
    """Everything a node hands back once its pipeline loop is done."""

    node: int
    pairs: list[tuple[int, int, int]]  # (pivot, column, column dim)
    zeros: list[tuple[int, int]]
    cleared: list[int]
    clearing: bool
    metrics: dict


def encode_report(rep: NodeReport) -> bytes:
    pairs = np.array(rep.pairs, dtype=np.uint64).reshape(-1, 3)
    prec = np.empty(len(pairs), dtype=_PAIR)
    prec["pivot"], prec["column"], prec["dim"] = pairs[:, 0], pairs[:, 1], pairs[:, 2]
    zeros = np.array(rep.zeros, dtype=np.uint64).reshape(-1, 2)
    zrec = np.empty(len(zeros), dtype=_ZERO)
    zrec["index"], zrec["dim"] = zeros[:, 0], zeros[:, 1]
    metrics = json.dumps(rep.metrics, sort_keys=True).encode()
    return b"".join([
        _RES_HEADER.pack(RES_MAGIC, VERSION, rep.node, int(rep.clearing)),
        _U64.pack(len(prec)), prec.tobytes(),
        _U64.pack(len(zrec)), zrec.tobytes(),
        _U64.pack(len(rep.cleared)), np.asarray(sorted(rep.cleared), dtype="<u8").tobytes(),
        _U64.pack(len(metrics)), metrics,
    ])


def decode_report(buf: bytes) -> NodeReport:
    r = _open(buf, RES_MAGIC)
    _, _, node, clearing = r.unpack(_RES_HEADER, "report header")
    (npairs,) = r.unpack(_U64, "pair count")
    prec = r.array(_PAIR, npairs, "pairs")
    (nzeros,) = r.unpack(_U64, "zero count")
    zrec = r.array(_ZERO, nzeros, "zeros")
    (ncleared,) = r.unpack(_U64, "cleared count")
    cleared = r.array("<u8", ncleared, "cleared")
    (mlen,) = r.unpack(_U64, "metrics length")
    start = r.need(mlen, "metrics")
    try:
        metrics = json.loads(bytes(r.buf[start:start + mlen]).decode())
    except ValueError as exc:
        raise DecodeError(f"bad metrics payload: {exc}", start) from exc
    r.finish()
    return NodeReport(
        int(node),
        [(int(a), int(b), int(c)) for a, b, c in zip(prec["pivot"], prec["column"], prec["dim"])],
        [(int(a), int(b)) for a, b in zip(zrec["index"], zrec["dim"])],
        [int(x) for x in cleared],
        bool(clearing),
        metrics,
    )
