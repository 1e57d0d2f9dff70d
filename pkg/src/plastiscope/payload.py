"""Binary wire format for frame, diff, and static-geometry payloads.

Columns travel as raw little-endian arrays behind a small self-describing
header, so a browser client can decode them with typed-array views and no
catalog lookup. Integer columns are narrowed to the smallest width that
holds their actual range (the descriptor records both the logical and the
wire dtype, so decoding restores the stored types bit-exactly) and the 0/1
fired column is bit-packed. The exact byte layout is documented in
``docs/payload_formats.md``.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .model import (
    COLUMN_ORDER,
    COLUMN_DTYPES,
    DELTA_DTYPES,
    AreaConnectivity,
    DiffFrame,
    FormatError,
    StaticTable,
    TimestepFrame,
)

FRAME_MAGIC = b"PLSF"
POSITIONS_MAGIC = b"PLSP"
PAYLOAD_VERSION = 1

KIND_FRAME = 0
KIND_DIFF = 1

_FLAG_CONNECTIVITY_MISSING = 0x01

# Wire/logical dtype codes. Code 0 is a bit-packed 0/1 column (wire only).
DTYPE_BITS = 0
_CODE_TO_DTYPE = {
    1: np.dtype("<u1"),
    2: np.dtype("<u2"),
    3: np.dtype("<u4"),
    4: np.dtype("<i1"),
    5: np.dtype("<i2"),
    6: np.dtype("<i4"),
    7: np.dtype("<i8"),
    8: np.dtype("<f4"),
    9: np.dtype("<f8"),
}
_DTYPE_TO_CODE = {dt: code for code, dt in _CODE_TO_DTYPE.items()}

_UNSIGNED_LADDER = [np.dtype("<u1"), np.dtype("<u2"), np.dtype("<u4")]
_SIGNED_LADDER = [np.dtype("<i1"), np.dtype("<i2"), np.dtype("<i4"), np.dtype("<i8")]


def _dtype_code(dtype: np.dtype) -> int:
    try:
        return _DTYPE_TO_CODE[np.dtype(dtype).newbyteorder("<")]
    except KeyError:
        raise FormatError(f"dtype {dtype} has no wire code") from None


def _narrow_dtype(column: np.ndarray) -> np.dtype:
    """Smallest same-signedness integer dtype holding the column's range."""
    dtype = column.dtype
    if dtype.kind == "f":
        return np.dtype(dtype).newbyteorder("<")
    lo = int(column.min()) if column.size else 0
    hi = int(column.max()) if column.size else 0
    ladder = _UNSIGNED_LADDER if dtype.kind == "u" else _SIGNED_LADDER
    for candidate in ladder:
        info = np.iinfo(candidate)
        if info.min <= lo and hi <= info.max:
            if candidate.itemsize <= dtype.itemsize:
                return candidate
    return np.dtype(dtype).newbyteorder("<")


def _pack_column(column: np.ndarray, bitpack: bool) -> tuple[int, bytes]:
    if bitpack:
        return DTYPE_BITS, np.packbits(column.astype(np.uint8), bitorder="little").tobytes()
    wire = _narrow_dtype(column)
    return _dtype_code(wire), np.ascontiguousarray(column.astype(wire)).tobytes()


def _encode_str(text: str) -> bytes:
    raw = text.encode("utf-8")
    if len(raw) > 255:
        raise FormatError(f"string too long for payload: {text!r}")
    return struct.pack("<B", len(raw)) + raw


def _sparse_connectivity(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    src, dst = np.nonzero(matrix)
    return src.astype("<u2"), dst.astype("<u2"), matrix[src, dst]


def _encode_payload(
    kind: int,
    n: int,
    a: int,
    flags: int,
    context: bytes,
    columns: dict[str, np.ndarray],
    conn_matrix: np.ndarray,
    conn_logical: np.dtype,
    bitpack_columns: frozenset[str],
) -> bytes:
    src, dst, values = _sparse_connectivity(conn_matrix)
    values = values.astype(conn_logical)
    conn_wire = _narrow_dtype(values)

    out = bytearray()
    out += struct.pack(
        "<4sBBHIHBBIB",
        FRAME_MAGIC,
        PAYLOAD_VERSION,
        kind,
        len(COLUMN_ORDER),
        n,
        a,
        _dtype_code(conn_logical),
        _dtype_code(conn_wire),
        len(values),
        flags,
    )
    out += context
    blocks = []
    for name in COLUMN_ORDER:
        column = columns[name]
        wire_code, data = _pack_column(column, bitpack=name in bitpack_columns)
        out += _encode_str(name)
        out += struct.pack("<BB", _dtype_code(column.dtype), wire_code)
        blocks.append(data)
    for block in blocks:
        out += block
    out += src.tobytes()
    out += dst.tobytes()
    out += values.astype(conn_wire).tobytes()
    return bytes(out)


def encode_frame(frame: TimestepFrame) -> bytes:
    """Encode a stored frame for transfer."""
    context = _encode_str(frame.scenario_id) + struct.pack("<I", frame.timestep)
    flags = _FLAG_CONNECTIVITY_MISSING if frame.connectivity_missing else 0
    return _encode_payload(
        kind=KIND_FRAME,
        n=frame.neuron_count,
        a=frame.area_count,
        flags=flags,
        context=context,
        columns=frame.columns,
        conn_matrix=frame.connectivity.counts,
        conn_logical=np.dtype("<u4"),
        bitpack_columns=frozenset({"fired"}),
    )


def encode_diff(diff: DiffFrame) -> bytes:
    """Encode a diff with the same framing as a frame but signed columns."""
    context = (
        _encode_str(diff.base[0])
        + struct.pack("<I", diff.base[1])
        + _encode_str(diff.other[0])
        + struct.pack("<I", diff.other[1])
    )
    return _encode_payload(
        kind=KIND_DIFF,
        n=diff.neuron_count,
        a=diff.area_count,
        flags=0,
        context=context,
        columns=diff.column_deltas,
        conn_matrix=diff.connectivity_delta,
        conn_logical=np.dtype("<i8"),
        bitpack_columns=frozenset(),
    )


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.offset = 0

    def take(self, count: int) -> bytes:
        if self.offset + count > len(self.data):
            raise FormatError("payload truncated")
        chunk = self.data[self.offset : self.offset + count]
        self.offset += count
        return chunk

    def unpack(self, fmt: str) -> tuple:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def take_str(self) -> str:
        (length,) = self.unpack("<B")
        return self.take(length).decode("utf-8")


def _read_column(reader: _Reader, n: int, logical_code: int, wire_code: int) -> np.ndarray:
    logical = _CODE_TO_DTYPE[logical_code]
    if wire_code == DTYPE_BITS:
        packed = np.frombuffer(reader.take((n + 7) // 8), dtype=np.uint8)
        return np.unpackbits(packed, count=n, bitorder="little").astype(logical)
    wire = _CODE_TO_DTYPE[wire_code]
    raw = np.frombuffer(reader.take(n * wire.itemsize), dtype=wire)
    return raw.astype(logical) if wire != logical else raw.copy()


def decode_payload(data: bytes) -> TimestepFrame | DiffFrame:
    """Decode a frame or diff payload back to its model type, bit-exactly."""
    reader = _Reader(data)
    (magic, version, kind, column_count, n, a, conn_logical_code, conn_wire_code, conn_rows, flags) = reader.unpack("<4sBBHIHBBIB")
    if magic != FRAME_MAGIC:
        raise FormatError(f"bad payload magic {magic!r}")
    if version != PAYLOAD_VERSION:
        raise FormatError(f"unsupported payload version {version}")
    if kind == KIND_FRAME:
        scenario = reader.take_str()
        (timestep,) = reader.unpack("<I")
    elif kind == KIND_DIFF:
        base_scenario = reader.take_str()
        (base_t,) = reader.unpack("<I")
        other_scenario = reader.take_str()
        (other_t,) = reader.unpack("<I")
    else:
        raise FormatError(f"unknown payload kind {kind}")

    descriptors = []
    for _ in range(column_count):
        name = reader.take_str()
        logical_code, wire_code = reader.unpack("<BB")
        descriptors.append((name, logical_code, wire_code))
    columns = {
        name: _read_column(reader, n, logical_code, wire_code)
        for name, logical_code, wire_code in descriptors
    }

    src = np.frombuffer(reader.take(conn_rows * 2), dtype="<u2")
    dst = np.frombuffer(reader.take(conn_rows * 2), dtype="<u2")
    conn_wire = _CODE_TO_DTYPE[conn_wire_code]
    conn_logical = _CODE_TO_DTYPE[conn_logical_code]
    values = np.frombuffer(reader.take(conn_rows * conn_wire.itemsize), dtype=conn_wire).astype(conn_logical)
    if reader.offset != len(data):
        raise FormatError("trailing bytes after payload")
    matrix = np.zeros((a, a), dtype=conn_logical)
    matrix[src, dst] = values

    if kind == KIND_FRAME:
        expected = {name: np.dtype(COLUMN_DTYPES[name]) for name in COLUMN_ORDER}
        _check_columns(columns, expected)
        return TimestepFrame(
            scenario_id=scenario,
            timestep=timestep,
            columns=columns,
            connectivity=AreaConnectivity(matrix),
            connectivity_missing=bool(flags & _FLAG_CONNECTIVITY_MISSING),
        )
    expected = {name: np.dtype(DELTA_DTYPES[name]) for name in COLUMN_ORDER}
    _check_columns(columns, expected)
    return DiffFrame(
        base=(base_scenario, base_t),
        other=(other_scenario, other_t),
        column_deltas=columns,
        connectivity_delta=matrix.astype(np.int64),
    )


def _check_columns(columns: dict[str, np.ndarray], expected: dict[str, np.dtype]) -> None:
    if set(columns) != set(expected):
        raise FormatError(f"payload columns {sorted(columns)} != expected {sorted(expected)}")
    for name, dtype in expected.items():
        if columns[name].dtype != dtype:
            raise FormatError(f"column {name} decoded as {columns[name].dtype}, expected {dtype}")


# ---------------------------------------------------------------------------
# Static geometry block
# ---------------------------------------------------------------------------

_POSITIONS_HEADER = struct.Struct("<4sBBHI")
_POSITIONS_RECORD = np.dtype(
    [
        ("neuron_id", "<u4"),
        ("x", "<f4"),
        ("y", "<f4"),
        ("z", "<f4"),
        ("cluster_id", "<u4"),
        ("cluster_slot", "<u4"),
        ("area_id", "<u4"),
    ]
)


@dataclass(frozen=True)
class PositionsBlock:
    """Decoded static geometry; area names come from the catalog instead."""

    neuron_id: np.ndarray
    positions: np.ndarray
    cluster_id: np.ndarray
    cluster_slot: np.ndarray
    area_id: np.ndarray


def encode_positions(statics: StaticTable) -> bytes:
    n = len(statics)
    records = np.empty(n, dtype=_POSITIONS_RECORD)
    ids = np.arange(n, dtype=np.uint32)
    records["neuron_id"] = ids
    records["x"] = statics.positions[:, 0]
    records["y"] = statics.positions[:, 1]
    records["z"] = statics.positions[:, 2]
    records["cluster_id"] = ids // 10
    records["cluster_slot"] = ids % 10
    records["area_id"] = statics.area_ids
    header = _POSITIONS_HEADER.pack(POSITIONS_MAGIC, PAYLOAD_VERSION, 0, 0, n)
    return header + records.tobytes()


def decode_positions(data: bytes) -> PositionsBlock:
    if len(data) < _POSITIONS_HEADER.size:
        raise FormatError("positions block truncated")
    magic, version, _, _, n = _POSITIONS_HEADER.unpack_from(data, 0)
    if magic != POSITIONS_MAGIC:
        raise FormatError(f"bad positions magic {magic!r}")
    if version != PAYLOAD_VERSION:
        raise FormatError(f"unsupported positions version {version}")
    body = data[_POSITIONS_HEADER.size :]
    if len(body) != n * _POSITIONS_RECORD.itemsize:
        raise FormatError("positions block has wrong record area size")
    records = np.frombuffer(body, dtype=_POSITIONS_RECORD)
    return PositionsBlock(
        neuron_id=records["neuron_id"].copy(),
        positions=np.column_stack([records["x"], records["y"], records["z"]]),
        cluster_id=records["cluster_id"].copy(),
        cluster_slot=records["cluster_slot"].copy(),
        area_id=records["area_id"].copy(),
    )
