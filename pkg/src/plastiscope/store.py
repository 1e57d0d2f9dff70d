"""Columnar persistence: frames as Parquet pairs, catalog as JSON.

Layout under a store root::

    catalog.json
    positions.parquet
    <scenario>/frame_<tttttt>.parquet   per-neuron columns
    <scenario>/conn_<tttttt>.parquet    sparse (src_area, dst_area, count) rows

Timesteps are zero-padded to six digits so lexical order equals numeric
order. All compression is lossless (snappy): every stored value survives a
write/read cycle bit-exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pyarrow as pa
import pyarrow.parquet as pq

from .model import (
    CLUSTER_SIZE,
    COLUMN_ORDER,
    AreaConnectivity,
    FormatError,
    FrameNotFoundError,
    ScenarioCatalog,
    SchemaError,
    StaticTable,
    TimestepFrame,
)

CATALOG_FILENAME = "catalog.json"
POSITIONS_FILENAME = "positions.parquet"

NEURON_SCHEMA = pa.schema(
    [
        ("neuron_id", pa.uint32()),
        ("calcium", pa.float32()),
        ("calcium_target_delta", pa.float32()),
        ("fired", pa.bool_()),
        ("fired_fraction", pa.float32()),
        ("grown_axons", pa.float32()),
        ("grown_dendrites", pa.float32()),
        ("synapses_in", pa.uint32()),
        ("synapses_out", pa.uint32()),
    ]
)

CONNECTIVITY_SCHEMA = pa.schema(
    [
        ("src_area", pa.uint16()),
        ("dst_area", pa.uint16()),
        ("count", pa.uint32()),
    ]
)

POSITIONS_SCHEMA = pa.schema(
    [
        ("neuron_id", pa.uint32()),
        ("x", pa.float32()),
        ("y", pa.float32()),
        ("z", pa.float32()),
        ("cluster_id", pa.uint32()),
        ("cluster_slot", pa.uint32()),
        ("area_id", pa.uint32()),
    ]
)

_META_AREA_COUNT = b"plastiscope.area_count"
_META_CONN_MISSING = b"plastiscope.connectivity_missing"
_META_AREA_TABLE = b"plastiscope.area_table"

# Sequential ids delta-pack to almost nothing; every data column dictionary-
# encodes well because simulation output is written with fixed precision.
_NEURON_DICT_COLUMNS = [name for name in NEURON_SCHEMA.names if name != "neuron_id"]
_NEURON_ENCODINGS = {"neuron_id": "DELTA_BINARY_PACKED"}


@dataclass(frozen=True)
class FrameLocator:
    """Paths of one stored frame, derivable purely from (scenario, timestep)."""

    scenario_id: str
    timestep: int
    neuron_path: Path
    connectivity_path: Path

    @classmethod
    def for_frame(cls, root: Path | str, scenario_id: str, timestep: int) -> "FrameLocator":
        scenario_dir = Path(root) / scenario_id
        return cls(
            scenario_id=scenario_id,
            timestep=timestep,
            neuron_path=scenario_dir / f"frame_{timestep:06d}.parquet",
            connectivity_path=scenario_dir / f"conn_{timestep:06d}.parquet",
        )


def _check_no_schema_drift(path: Path, expected: pa.Schema) -> None:
    if not path.exists():
        return
    existing = pq.read_schema(path)
    if [(f.name, f.type) for f in existing] != [(f.name, f.type) for f in expected]:
        raise SchemaError(f"{path}: existing file schema conflicts with {expected.names}")


def _validate_schema(path: Path, actual: pa.Schema, expected: pa.Schema) -> None:
    got = [(f.name, f.type) for f in actual]
    want = [(f.name, f.type) for f in expected]
    if got != want:
        raise SchemaError(f"{path}: schema drift, got {got}, expected {want}")


def write_frame(frame: TimestepFrame, root: Path | str) -> FrameLocator:
    """Persist one frame as a neuron-column file plus a sparse connectivity
    file (zero-count pairs omitted). Returns where it landed."""
    locator = FrameLocator.for_frame(root, frame.scenario_id, frame.timestep)
    locator.neuron_path.parent.mkdir(parents=True, exist_ok=True)
    _check_no_schema_drift(locator.neuron_path, NEURON_SCHEMA)
    _check_no_schema_drift(locator.connectivity_path, CONNECTIVITY_SCHEMA)

    n = frame.neuron_count
    arrays = [pa.array(np.arange(n, dtype=np.uint32), type=pa.uint32())]
    for name in COLUMN_ORDER:
        column = frame.columns[name]
        if name == "fired":
            arrays.append(pa.array(column.astype(bool)))
        else:
            arrays.append(pa.array(column))
    neuron_table = pa.Table.from_arrays(arrays, schema=NEURON_SCHEMA)
    pq.write_table(
        neuron_table,
        locator.neuron_path,
        compression="snappy",
        use_dictionary=_NEURON_DICT_COLUMNS,
        column_encoding=_NEURON_ENCODINGS,
    )

    counts = frame.connectivity.counts
    src, dst = np.nonzero(counts)
    conn_schema = CONNECTIVITY_SCHEMA.with_metadata(
        {
            _META_AREA_COUNT: str(frame.area_count).encode(),
            _META_CONN_MISSING: b"1" if frame.connectivity_missing else b"0",
        }
    )
    conn_table = pa.Table.from_arrays(
        [
            pa.array(src.astype(np.uint16), type=pa.uint16()),
            pa.array(dst.astype(np.uint16), type=pa.uint16()),
            pa.array(counts[src, dst], type=pa.uint32()),
        ],
        schema=conn_schema,
    )
    pq.write_table(conn_table, locator.connectivity_path, compression="snappy")
    return locator


def read_frame(locator: FrameLocator) -> TimestepFrame:
    """Read a frame back; the result is bit-exactly what was written."""
    if not locator.neuron_path.exists() or not locator.connectivity_path.exists():
        raise FrameNotFoundError(
            f"no stored frame for ({locator.scenario_id}, {locator.timestep})"
        )
    neuron_table = pq.read_table(locator.neuron_path)
    _validate_schema(locator.neuron_path, neuron_table.schema, NEURON_SCHEMA)
    ids = neuron_table.column("neuron_id").to_numpy()
    n = len(ids)
    if not np.array_equal(ids, np.arange(n, dtype=np.uint32)):
        raise SchemaError(f"{locator.neuron_path}: neuron ids are not 0..{n - 1} in order")
    columns = {}
    for name in COLUMN_ORDER:
        data = neuron_table.column(name).to_numpy()
        columns[name] = data.astype(np.uint8) if name == "fired" else data

    conn_table = pq.read_table(locator.connectivity_path)
    _validate_schema(locator.connectivity_path, conn_table.schema.remove_metadata(), CONNECTIVITY_SCHEMA)
    metadata = conn_table.schema.metadata or {}
    try:
        area_count = int(metadata[_META_AREA_COUNT])
    except (KeyError, ValueError) as exc:
        raise SchemaError(f"{locator.connectivity_path}: missing area_count metadata") from exc
    missing = metadata.get(_META_CONN_MISSING, b"0") == b"1"
    counts = np.zeros((area_count, area_count), dtype=np.uint32)
    src = conn_table.column("src_area").to_numpy()
    dst = conn_table.column("dst_area").to_numpy()
    counts[src, dst] = conn_table.column("count").to_numpy()

    return TimestepFrame(
        scenario_id=locator.scenario_id,
        timestep=locator.timestep,
        columns=columns,
        connectivity=AreaConnectivity(counts),
        connectivity_missing=missing,
    )


def frame_size_on_disk(locator: FrameLocator) -> int:
    """Bytes of both files of a stored frame."""
    return locator.neuron_path.stat().st_size + locator.connectivity_path.stat().st_size


def write_catalog(catalog: ScenarioCatalog, root: Path | str) -> Path:
    path = Path(root) / CATALOG_FILENAME
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(catalog.to_json_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def read_catalog(root: Path | str) -> ScenarioCatalog:
    path = Path(root) / CATALOG_FILENAME
    if not path.exists():
        raise FrameNotFoundError(f"no catalog at {path}")
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: malformed catalog JSON: {exc}") from exc
    return ScenarioCatalog.from_json_dict(doc)


def write_positions(statics: StaticTable, root: Path | str) -> Path:
    """Persist static neuron identity (with the area name table) in the store."""
    path = Path(root) / POSITIONS_FILENAME
    path.parent.mkdir(parents=True, exist_ok=True)
    n = len(statics)
    ids = np.arange(n, dtype=np.uint32)
    schema = POSITIONS_SCHEMA.with_metadata(
        {_META_AREA_TABLE: json.dumps(statics.area_names).encode()}
    )
    table = pa.Table.from_arrays(
        [
            pa.array(ids, type=pa.uint32()),
            pa.array(statics.positions[:, 0]),
            pa.array(statics.positions[:, 1]),
            pa.array(statics.positions[:, 2]),
            pa.array(ids // CLUSTER_SIZE, type=pa.uint32()),
            pa.array(ids % CLUSTER_SIZE, type=pa.uint32()),
            pa.array(statics.area_ids, type=pa.uint32()),
        ],
        schema=schema,
    )
    pq.write_table(table, path, compression="snappy")
    return path


def read_positions(root: Path | str) -> StaticTable:
    path = Path(root) / POSITIONS_FILENAME
    if not path.exists():
        raise FrameNotFoundError(f"no positions file at {path}")
    table = pq.read_table(path)
    _validate_schema(path, table.schema.remove_metadata(), POSITIONS_SCHEMA)
    metadata = table.schema.metadata or {}
    try:
        area_names = json.loads(metadata[_META_AREA_TABLE])
    except (KeyError, json.JSONDecodeError) as exc:
        raise SchemaError(f"{path}: missing area table metadata") from exc
    positions = np.column_stack(
        [table.column(axis).to_numpy() for axis in ("x", "y", "z")]
    )
    return StaticTable(
        positions=positions,
        area_ids=table.column("area_id").to_numpy(),
        area_names=list(area_names),
    )
