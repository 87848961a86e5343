"""On-disk formats: DBND boundary matrices, pairs files, raw voxel images.

DBND (little-endian): magic "DBND", version u16, n u64, dims u16[n],
column offsets u64[n+1], concatenated row indices u64.

Pairs, text: a ``# dim birth death`` header then one ``dim birth death`` record
per line, ``inf`` for essential classes; two extra value columns when
filtration values are attached.
Pairs, binary: magic "DPRS", version u16, flags u16 (bit 0: values),
count u64, then records dim u16, birth u64, death u64 (u64 max = infinite)
[, birth value f64, death value f64].

Raw image: extents u64[3], then values f64 in C order.
"""
from __future__ import annotations

import math
import os
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..matrix import BoundaryMatrix
from ..oracle import INFINITE, PersistenceDiagram, PersistencePair
from .cubical import Image3D

VERSION = 1
DBND_MAGIC = b"DBND"
DPRS_MAGIC = b"DPRS"
U64_MAX = 2**64 - 1

_DBND_HEADER = struct.Struct("<4sHQ")
_DPRS_HEADER = struct.Struct("<4sHHQ")
_REC = np.dtype([("dim", "<u2"), ("birth", "<u8"), ("death", "<u8")])
_REC_VALUES = np.dtype(_REC.descr + [("birth_value", "<f8"), ("death_value", "<f8")])
TEXT_HEADER = "# dim birth death"
TEXT_HEADER_VALUES = "# dim birth death birth_value death_value"


class FormatError(ValueError):
    pass


def dbnd_size(n: int, nnz: int) -> int:
    return _DBND_HEADER.size + 2 * n + 8 * (n + 1) + 8 * nnz


def write_matrix(m: BoundaryMatrix, path) -> None:
    if m.n and int(m.dims.max()) > 0xFFFF:
        raise FormatError("cell dimension does not fit in u16")
    with open(path, "wb") as fh:
        fh.write(_DBND_HEADER.pack(DBND_MAGIC, VERSION, m.n))
        fh.write(m.dims.astype("<u2").tobytes())
        fh.write(m.offsets.astype("<u8").tobytes())
        fh.write(m.rows.astype("<u8").tobytes())


def read_matrix(path, mmap: bool = False) -> BoundaryMatrix:
    """Load a DBND file; with ``mmap`` the offset and row tables stay on disk."""
    size = os.path.getsize(path)
    with open(path, "rb") as fh:
        head = fh.read(_DBND_HEADER.size)
    if len(head) < 4 or head[:4] != DBND_MAGIC:
        raise FormatError(f"{path}: bad magic {head[:4]!r}")
    if len(head) < _DBND_HEADER.size:
        raise FormatError(f"{path}: truncated header")
    _, version, n = _DBND_HEADER.unpack(head)
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    tables = _DBND_HEADER.size + 2 * n + 8 * (n + 1)
    if size < tables:
        raise FormatError(f"{path}: truncated file ({size} bytes, tables need {tables})")
    off_dims = _DBND_HEADER.size
    off_offsets = off_dims + 2 * n
    if mmap:
        dims = np.memmap(path, dtype="<u2", mode="r", offset=off_dims, shape=(n,))
        offsets = np.memmap(path, dtype="<i8", mode="r", offset=off_offsets, shape=(n + 1,))
    else:
        raw = Path(path).read_bytes()
        dims = np.frombuffer(raw, dtype="<u2", count=n, offset=off_dims)
        offsets = np.frombuffer(raw, dtype="<i8", count=n + 1, offset=off_offsets)
    if offsets[0] != 0 or np.any(np.diff(offsets) < 0):
        raise FormatError(f"{path}: non-monotone column offsets")
    nnz = int(offsets[-1])
    if size != tables + 8 * nnz:
        kind = "truncated" if size < tables + 8 * nnz else "oversized"
        raise FormatError(f"{path}: {kind} file, expected {tables + 8 * nnz} bytes, found {size}")
    if mmap:
        rows = (np.memmap(path, dtype="<i8", mode="r", offset=tables, shape=(nnz,))
                if nnz else np.empty(0, dtype=np.int64))
        return _Mapped(dims, offsets, rows)
    rows = np.frombuffer(raw, dtype="<i8", count=nnz, offset=tables)
    return BoundaryMatrix(dims.astype(np.int64), offsets.astype(np.int64), rows.astype(np.int64))


class _Mapped(BoundaryMatrix):
    """BoundaryMatrix over memory-mapped tables (no copy of rows or offsets)."""

    def __init__(self, dims, offsets, rows):
        self.dims = np.asarray(dims, dtype=np.int64)
        self.offsets = offsets
        self.rows = rows


@dataclass
class PairsFile:
    records: list[PersistencePair]
    values: list[tuple[float, float]] | None = None

    def keys(self, mode: str = "index") -> list[tuple]:
        if mode == "index":
            return [(r.dim, r.birth, r.death) for r in self.records]
        if self.values is None:
            raise FormatError("value comparison needs a pairs file with filtration values")
        return [(r.dim, bv, dv) for r, (bv, dv) in zip(self.records, self.values)]


def _records(pairs) -> list[PersistencePair]:
    if isinstance(pairs, PersistenceDiagram):
        return pairs.records()
    return sorted(pairs, key=lambda p: (p.dim, p.birth))


def attach_values(records: list[PersistencePair], filtration_values) -> list[tuple[float, float]]:
    fv = np.asarray(filtration_values, dtype=np.float64)
    return [
        (float(fv[r.birth - 1]), INFINITE if r.death == INFINITE else float(fv[int(r.death) - 1]))
        for r in records
    ]


def write_pairs(path, pairs, *, binary: bool = False, filtration_values=None) -> None:
    """Write a diagram (or pair records) sorted by (dim, birth)."""
    records = _records(pairs)
    values = attach_values(records, filtration_values) if filtration_values is not None else None
    if binary:
        Path(path).write_bytes(encode_pairs_binary(records, values))
    else:
        Path(path).write_text(encode_pairs_text(records, values))


def encode_pairs_text(records, values=None) -> str:
    lines = [TEXT_HEADER_VALUES if values is not None else TEXT_HEADER]
    for k, r in enumerate(records):
        death = "inf" if r.death == INFINITE else str(int(r.death))
        line = f"{r.dim} {r.birth} {death}"
        if values is not None:
            bv, dv = values[k]
            line += f" {bv!r} {'inf' if math.isinf(dv) else repr(dv)}"
        lines.append(line)
    return "\n".join(lines) + "\n"


def encode_pairs_binary(records, values=None) -> bytes:
    dt = _REC_VALUES if values is not None else _REC
    arr = np.zeros(len(records), dtype=dt)
    if records:
        arr["dim"] = [r.dim for r in records]
        arr["birth"] = [r.birth for r in records]
        arr["death"] = [U64_MAX if r.death == INFINITE else int(r.death) for r in records]
        if values is not None:
            arr["birth_value"] = [v[0] for v in values]
            arr["death_value"] = [v[1] for v in values]
    head = _DPRS_HEADER.pack(DPRS_MAGIC, VERSION, int(values is not None), len(records))
    return head + arr.tobytes()


def read_pairs(path) -> PairsFile:
    raw = Path(path).read_bytes()
    if raw[:4] == DPRS_MAGIC:
        return decode_pairs_binary(raw)
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise FormatError(f"{path}: neither a binary nor a text pairs file") from exc
    return decode_pairs_text(text)


def decode_pairs_binary(raw: bytes) -> PairsFile:
    if len(raw) < _DPRS_HEADER.size:
        raise FormatError(f"truncated pairs header at offset {len(raw)}")
    magic, version, flags, count = _DPRS_HEADER.unpack_from(raw)
    if magic != DPRS_MAGIC:
        raise FormatError("bad pairs magic at offset 0")
    if version != VERSION:
        raise FormatError(f"unsupported pairs version {version} at offset 4")
    dt = _REC_VALUES if flags & 1 else _REC
    body = len(raw) - _DPRS_HEADER.size
    if body != count * dt.itemsize:
        raise FormatError(
            f"pairs body is {body} bytes, expected {count * dt.itemsize} at offset {_DPRS_HEADER.size}"
        )
    arr = np.frombuffer(raw, dtype=dt, count=count, offset=_DPRS_HEADER.size)
    records = [
        PersistencePair(int(b), INFINITE if int(d) == U64_MAX else int(d), int(k))
        for k, b, d in zip(arr["dim"], arr["birth"], arr["death"])
    ]
    values = None
    if flags & 1:
        values = [(float(a), float(b)) for a, b in zip(arr["birth_value"], arr["death_value"])]
    return PairsFile(records, values)


def decode_pairs_text(text: str) -> PairsFile:
    records: list[PersistencePair] = []
    values: list[tuple[float, float]] | None = None
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            if lineno == 1 and line == TEXT_HEADER_VALUES:
                values = []
            continue
        fields = line.split()
        want = 5 if values is not None else 3
        if len(fields) != want:
            raise FormatError(f"line {lineno}: expected {want} fields, got {len(fields)}")
        try:
            dim, birth = int(fields[0]), int(fields[1])
            death = INFINITE if fields[2] == "inf" else int(fields[2])
            if values is not None:
                values.append((float(fields[3]), float(fields[4])))
        except ValueError as exc:
            raise FormatError(f"line {lineno}: {exc}") from exc
        if dim < 0 or birth < 1 or death <= birth:
            raise FormatError(f"line {lineno}: invalid record {line!r}")
        records.append(PersistencePair(birth, death, dim))
    return PairsFile(records, values)


def write_image(img: Image3D, path) -> None:
    with open(path, "wb") as fh:
        fh.write(np.asarray(img.extents, dtype="<u8").tobytes())
        fh.write(np.ascontiguousarray(img.values, dtype="<f8").tobytes())


def read_image(path) -> Image3D:
    raw = Path(path).read_bytes()
    if len(raw) < 24:
        raise FormatError(f"{path}: truncated image header")
    ext = np.frombuffer(raw, dtype="<u8", count=3)
    if np.any(ext < 1):
        raise FormatError(f"{path}: extents must be >= 1, got {ext.tolist()}")
    count = int(ext[0]) * int(ext[1]) * int(ext[2])
    if len(raw) != 24 + 8 * count:
        raise FormatError(f"{path}: expected {24 + 8 * count} bytes, found {len(raw)}")
    vals = np.frombuffer(raw, dtype="<f8", count=count, offset=24)
    return Image3D(vals.reshape(tuple(int(e) for e in ext)).astype(np.float64))


def is_matrix_file(path) -> bool:
    with open(path, "rb") as fh:
        return fh.read(4) == DBND_MAGIC
