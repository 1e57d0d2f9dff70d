"""Area-to-area aggregation, property ranges, and frame diffs.

All operations are pure functions over model types and safe to call in
parallel on shared (read-only) inputs.
"""

from __future__ import annotations

from typing import Iterable

import numpy as np

from .model import (
    COLUMN_ORDER,
    DELTA_DTYPES,
    AreaConnectivity,
    DiffFrame,
    NeuronProperty,
    PropertyRange,
    StaticTable,
    TimestepFrame,
    ValidationError,
)


def aggregate_connectivity(synapses: np.ndarray, statics: StaticTable) -> AreaConnectivity:
    """Count synapses per (source area, target area) pair.

    ``synapses`` is an (M, 2) array of (target_id, source_id) rows, matching
    the raw network-file column order. Synapse weights, if any, are ignored:
    entries are unweighted edge counts. The total count is preserved.
    """
    pairs = np.asarray(synapses, dtype=np.int64)
    if pairs.size == 0:
        return AreaConnectivity.zeros(statics.area_count)
    if pairs.ndim != 2 or pairs.shape[1] != 2:
        raise ValidationError(f"synapse list must be (M, 2), got {pairs.shape}")
    n = len(statics)
    bad = np.nonzero((pairs < 0).any(axis=1) | (pairs >= n).any(axis=1))[0]
    if bad.size:
        row = int(bad[0])
        raise ValidationError(
            f"synapse row {row} references neuron outside 0..{n - 1}: "
            f"(target={int(pairs[row, 0])}, source={int(pairs[row, 1])})"
        )
    a = statics.area_count
    src_area = statics.area_ids[pairs[:, 1]].astype(np.int64)
    dst_area = statics.area_ids[pairs[:, 0]].astype(np.int64)
    flat = np.bincount(src_area * a + dst_area, minlength=a * a)
    return AreaConnectivity(flat.reshape(a, a).astype(np.uint32))


def local_range(frame: TimestepFrame, prop: NeuronProperty | str) -> PropertyRange:
    """Exact min/max of one property column for a single timestep."""
    name = NeuronProperty(prop).value
    if name == NeuronProperty.AREA.value:
        raise ValidationError("area is categorical static data, not a ranged column")
    column = frame.columns[name]
    if column.size == 0:
        raise ValidationError(f"cannot range empty column {name}")
    return PropertyRange(float(column.min()), float(column.max()))


def global_range(frames: Iterable[TimestepFrame], prop: NeuronProperty | str) -> PropertyRange:
    """Min of mins / max of maxes over every frame of a scenario."""
    merged: PropertyRange | None = None
    for frame in frames:
        r = local_range(frame, prop)
        merged = r if merged is None else merged.merge(r)
    if merged is None:
        raise ValidationError("global_range requires at least one frame")
    return merged


def diff_frames(base: TimestepFrame, other: TimestepFrame) -> DiffFrame:
    """Signed per-neuron and per-area-pair deltas, other - base."""
    if base.neuron_count != other.neuron_count:
        raise ValidationError(
            f"neuron count mismatch: {base.neuron_count} vs {other.neuron_count}"
        )
    if base.area_count != other.area_count:
        raise ValidationError(f"area count mismatch: {base.area_count} vs {other.area_count}")
    deltas = {}
    for name in COLUMN_ORDER:
        dtype = DELTA_DTYPES[name]
        if np.issubdtype(dtype, np.floating):
            deltas[name] = other.columns[name].astype(dtype) - base.columns[name].astype(dtype)
        else:
            deltas[name] = other.columns[name].astype(np.int64) - base.columns[name].astype(np.int64)
    conn = other.connectivity.counts.astype(np.int64) - base.connectivity.counts.astype(np.int64)
    return DiffFrame(
        base=base.coordinate,
        other=other.coordinate,
        column_deltas=deltas,
        connectivity_delta=conn,
    )


def diff_color_scale(deltas: np.ndarray) -> PropertyRange:
    """Symmetric (-m, +m) range for a delta column, so zero maps to the midpoint."""
    values = np.asarray(deltas)
    if values.size == 0:
        raise ValidationError("cannot scale an empty delta column")
    m = float(np.abs(values).max())
    return PropertyRange(-m, m)
