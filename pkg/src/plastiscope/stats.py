"""Statistics backing the 2D charts: histograms, per-area box summaries,
and parallel-coordinates extracts.

Every function is a pure function of (frame, statics, parameters): identical
inputs give identical outputs, and nothing here mutates its arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import (
    NeuronProperty,
    PropertyRange,
    StaticTable,
    TimestepFrame,
    ValidationError,
    property_column,
)

DEFAULT_BIN_COUNT = 20

#: Fixed parallel-coordinates axes, in display order.
PARALLEL_AXES = ("area", "calcium", "fired_fraction", "grown_axons", "grown_dendrites")

#: Whisker fences sit at most this many IQRs beyond the quartile box.
WHISKER_IQR_FACTOR = 1.5


@dataclass(frozen=True)
class HistogramStats:
    property: str
    range: PropertyRange
    bin_count: int
    counts: np.ndarray

    def __post_init__(self) -> None:
        counts = np.ascontiguousarray(self.counts, dtype=np.int64)
        if counts.shape != (self.bin_count,):
            raise ValidationError(f"counts shape {counts.shape} != bin_count {self.bin_count}")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    def to_json_dict(self) -> dict:
        return {
            "property": self.property,
            "range": {"min": self.range.min, "max": self.range.max},
            "bin_count": self.bin_count,
            "counts": self.counts.tolist(),
        }


@dataclass(frozen=True)
class BoxStats:
    """Five-number summary plus whiskers and outliers for one brain area."""

    area_id: int
    min: float
    q1: float
    median: float
    q3: float
    max: float
    whisker_low: float
    whisker_high: float
    outliers: tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        chain = (self.min, self.whisker_low, self.q1, self.median, self.q3, self.whisker_high, self.max)
        if any(a > b for a, b in zip(chain, chain[1:])):
            raise ValidationError(f"box summary not ordered for area {self.area_id}: {chain}")

    def to_json_dict(self) -> dict:
        return {
            "area_id": self.area_id,
            "min": self.min,
            "q1": self.q1,
            "median": self.median,
            "q3": self.q3,
            "max": self.max,
            "whisker_low": self.whisker_low,
            "whisker_high": self.whisker_high,
            "outliers": list(self.outliers),
        }


@dataclass(frozen=True)
class ParallelCoordsExtract:
    """Per-neuron rows over the five fixed axes, subsampled deterministically."""

    axes: tuple[str, ...]
    rows: np.ndarray
    stride: int

    def __post_init__(self) -> None:
        rows = np.ascontiguousarray(self.rows, dtype=np.float64)
        if rows.ndim != 2 or rows.shape[1] != len(self.axes):
            raise ValidationError(f"rows shape {rows.shape} does not match axes {self.axes}")
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)

    def to_json_dict(self) -> dict:
        return {"axes": list(self.axes), "rows": self.rows.tolist(), "stride": self.stride}


def histogram(
    column: np.ndarray,
    value_range: PropertyRange,
    bin_count: int = DEFAULT_BIN_COUNT,
    property_name: str = "",
) -> HistogramStats:
    """Fixed-range histogram of one column.

    Bins are half-open [lo, hi) except the last, which is closed; finite
    values outside the range clamp into the end bins, so total mass always
    equals the number of finite inputs.
    """
    if bin_count < 1:
        raise ValidationError(f"bin_count must be >= 1, got {bin_count}")
    values = np.asarray(column, dtype=np.float64)
    values = values[np.isfinite(values)]
    width = (value_range.max - value_range.min) / bin_count
    if width <= 0.0:
        # Degenerate range: the closed last bin takes everything.
        idx = np.full(values.shape, bin_count - 1, dtype=np.int64)
    else:
        idx = np.floor((values - value_range.min) / width).astype(np.int64)
        np.clip(idx, 0, bin_count - 1, out=idx)
    counts = np.bincount(idx, minlength=bin_count)
    return HistogramStats(
        property=property_name,
        range=value_range,
        bin_count=bin_count,
        counts=counts,
    )


def quartiles(values: np.ndarray) -> tuple[float, float, float]:
    """Type-7 quartiles: linear interpolation of order statistics at h = (n-1)q."""
    data = np.sort(np.asarray(values, dtype=np.float64))
    if data.size == 0:
        raise ValidationError("cannot take quartiles of an empty sample")
    out = []
    n = data.size
    for q in (0.25, 0.5, 0.75):
        h = (n - 1) * q
        lo = math.floor(h)
        hi = min(lo + 1, n - 1)
        out.append(float(data[lo] + (h - lo) * (data[hi] - data[lo])))
    return out[0], out[1], out[2]


def box_stats_by_area(
    frame: TimestepFrame, prop: NeuronProperty | str, statics: StaticTable
) -> list[BoxStats]:
    """Box-and-whisker summaries of one property, separated by brain area.

    Whiskers reach the most extreme data point within 1.5 IQR of the box;
    values beyond the fences are listed as outliers. Areas with no neurons
    are omitted.
    """
    column = np.asarray(property_column(frame, prop, statics), dtype=np.float64)
    out: list[BoxStats] = []
    for area_id in range(statics.area_count):
        values = column[statics.area_ids == area_id]
        if values.size == 0:
            continue
        q1, median, q3 = quartiles(values)
        iqr = q3 - q1
        fence_low = q1 - WHISKER_IQR_FACTOR * iqr
        fence_high = q3 + WHISKER_IQR_FACTOR * iqr
        inside = values[(values >= fence_low) & (values <= fence_high)]
        outliers = values[(values < fence_low) | (values > fence_high)]
        out.append(
            BoxStats(
                area_id=area_id,
                min=float(values.min()),
                q1=q1,
                median=median,
                q3=q3,
                max=float(values.max()),
                whisker_low=float(inside.min()),
                whisker_high=float(inside.max()),
                outliers=tuple(float(v) for v in np.sort(outliers)),
            )
        )
    return out


def parallel_coords(frame: TimestepFrame, statics: StaticTable, cap: int) -> ParallelCoordsExtract:
    """Rows for the five fixed axes, subsampled by a deterministic stride.

    With N <= cap every neuron is emitted in id order; otherwise every k-th
    neuron with k = ceil(N / cap). No randomness is involved, so repeated
    extracts are identical.
    """
    if cap < 1:
        raise ValidationError(f"cap must be >= 1, got {cap}")
    n = frame.neuron_count
    stride = 1 if n <= cap else math.ceil(n / cap)
    picked = np.arange(0, n, stride)
    rows = np.empty((picked.size, len(PARALLEL_AXES)), dtype=np.float64)
    for j, axis in enumerate(PARALLEL_AXES):
        rows[:, j] = property_column(frame, axis, statics)[picked].astype(np.float64)
    return ParallelCoordsExtract(axes=PARALLEL_AXES, rows=rows, stride=stride)
