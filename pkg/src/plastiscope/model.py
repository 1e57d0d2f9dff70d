"""Domain types shared by every other module.

Everything here is an in-memory value type: construction validates the
invariants, instances are treated as immutable afterwards and are safe to
read from any number of threads. No I/O happens in this module.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator

import numpy as np

#: Neurons are generated in clusters of exactly this many per measured location.
CLUSTER_SIZE = 10

#: Canonical simulation scenarios, id -> display name.
CANONICAL_SCENARIOS = {
    "no_connectivity": "No Initial Connectivity",
    "learning": "Learning",
    "injury": "Injury",
    "calcium_targets": "Per-Neuron Calcium Targets",
}


class FormatError(ValueError):
    """An input file does not match its documented format."""


class ValidationError(ValueError):
    """Structurally valid data violates a domain invariant."""


class SchemaError(ValueError):
    """Stored column names or types drifted from the fixed schema."""


class FrameNotFoundError(LookupError):
    """A (scenario, timestep) coordinate has no stored frame."""


class NeuronProperty(str, Enum):
    """The nine per-neuron properties a view can be colored by.

    ``area`` comes from static data; the other eight are per-timestep
    frame columns.
    """

    AREA = "area"
    CALCIUM = "calcium"
    CALCIUM_TARGET_DELTA = "calcium_target_delta"
    FIRED = "fired"
    FIRED_FRACTION = "fired_fraction"
    GROWN_AXONS = "grown_axons"
    GROWN_DENDRITES = "grown_dendrites"
    SYNAPSES_OUT = "synapses_out"
    SYNAPSES_IN = "synapses_in"


#: Frame columns in canonical (storage) order. ``area`` is static, not a column.
COLUMN_ORDER = (
    "calcium",
    "calcium_target_delta",
    "fired",
    "fired_fraction",
    "grown_axons",
    "grown_dendrites",
    "synapses_in",
    "synapses_out",
)

#: In-memory dtype per column. Reals are float32, synapse counts uint32,
#: fired is a 0/1 uint8 flag (stored as boolean on disk).
COLUMN_DTYPES = {
    "calcium": np.float32,
    "calcium_target_delta": np.float32,
    "fired": np.uint8,
    "fired_fraction": np.float32,
    "grown_axons": np.float32,
    "grown_dendrites": np.float32,
    "synapses_in": np.uint32,
    "synapses_out": np.uint32,
}

#: Signed dtype used for per-column deltas in a DiffFrame.
DELTA_DTYPES = {
    "calcium": np.float32,
    "calcium_target_delta": np.float32,
    "fired": np.int8,
    "fired_fraction": np.float32,
    "grown_axons": np.float32,
    "grown_dendrites": np.float32,
    "synapses_in": np.int64,
    "synapses_out": np.int64,
}


@dataclass(frozen=True)
class NeuronStatic:
    """Immutable per-neuron identity: where it sits and what it belongs to."""

    neuron_id: int
    position: tuple[float, float, float]
    cluster_id: int
    cluster_slot: int
    area_id: int

    def __post_init__(self) -> None:
        if self.neuron_id != self.cluster_id * CLUSTER_SIZE + self.cluster_slot:
            raise ValidationError(
                f"neuron {self.neuron_id}: id must equal "
                f"cluster_id*{CLUSTER_SIZE}+cluster_slot "
                f"(got cluster {self.cluster_id}, slot {self.cluster_slot})"
            )
        if not 0 <= self.cluster_slot < CLUSTER_SIZE:
            raise ValidationError(f"neuron {self.neuron_id}: slot {self.cluster_slot} out of range")


class StaticTable:
    """Columnar table of all neurons' static identity plus the area name table.

    Neurons are ordered by ``neuron_id``; cluster ids and slots follow from
    the id. All arrays are read-only views.
    """

    def __init__(self, positions: np.ndarray, area_ids: np.ndarray, area_names: list[str]):
        positions = np.ascontiguousarray(positions, dtype=np.float32)
        area_ids = np.ascontiguousarray(area_ids, dtype=np.uint32)
        if positions.ndim != 2 or positions.shape[1] != 3:
            raise ValidationError(f"positions must be (N, 3), got {positions.shape}")
        n = positions.shape[0]
        if area_ids.shape != (n,):
            raise ValidationError("area_ids length must match positions")
        if n % CLUSTER_SIZE != 0:
            raise ValidationError(f"neuron count {n} is not a multiple of {CLUSTER_SIZE}")
        if n and area_ids.max(initial=0) >= len(area_names):
            raise ValidationError("area_id exceeds the area name table")
        by_cluster = area_ids.reshape(-1, CLUSTER_SIZE)
        mixed = np.nonzero((by_cluster != by_cluster[:, :1]).any(axis=1))[0]
        if mixed.size:
            raise ValidationError(f"cluster {int(mixed[0])} spans multiple areas")
        for arr in (positions, area_ids):
            arr.setflags(write=False)
        self.positions = positions
        self.area_ids = area_ids
        self.area_names = list(area_names)

    def __len__(self) -> int:
        return self.positions.shape[0]

    @property
    def neuron_count(self) -> int:
        return len(self)

    @property
    def area_count(self) -> int:
        return len(self.area_names)

    @property
    def cluster_count(self) -> int:
        return len(self) // CLUSTER_SIZE

    def record(self, neuron_id: int) -> NeuronStatic:
        if not 0 <= neuron_id < len(self):
            raise IndexError(f"neuron_id {neuron_id} out of range 0..{len(self) - 1}")
        x, y, z = (float(v) for v in self.positions[neuron_id])
        return NeuronStatic(
            neuron_id=neuron_id,
            position=(x, y, z),
            cluster_id=neuron_id // CLUSTER_SIZE,
            cluster_slot=neuron_id % CLUSTER_SIZE,
            area_id=int(self.area_ids[neuron_id]),
        )

    def records(self) -> Iterator[NeuronStatic]:
        for i in range(len(self)):
            yield self.record(i)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, StaticTable):
            return NotImplemented
        return (
            self.area_names == other.area_names
            and np.array_equal(self.positions, other.positions)
            and np.array_equal(self.area_ids, other.area_ids)
        )


@dataclass(frozen=True)
class PropertyRange:
    """Closed value interval used for color normalization and histogram extents."""

    min: float
    max: float

    def __post_init__(self) -> None:
        if not self.min <= self.max:
            raise ValidationError(f"range min {self.min} exceeds max {self.max}")

    def contains(self, other: "PropertyRange") -> bool:
        return self.min <= other.min and other.max <= self.max

    def merge(self, other: "PropertyRange") -> "PropertyRange":
        return PropertyRange(min(self.min, other.min), max(self.max, other.max))


@dataclass(frozen=True)
class AreaConnectivity:
    """Dense area-to-area synapse counts; entry (s, t) counts synapses from
    neurons in area s to neurons in area t. Self-loops stay on the diagonal."""

    counts: np.ndarray

    def __post_init__(self) -> None:
        counts = np.ascontiguousarray(self.counts, dtype=np.uint32)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
            raise ValidationError(f"connectivity must be square, got {counts.shape}")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @property
    def area_count(self) -> int:
        return self.counts.shape[0]

    @property
    def total(self) -> int:
        return int(self.counts.sum(dtype=np.uint64))

    @classmethod
    def zeros(cls, area_count: int) -> "AreaConnectivity":
        return cls(np.zeros((area_count, area_count), dtype=np.uint32))


@dataclass(frozen=True)
class TimestepFrame:
    """All per-neuron properties plus area connectivity at one output timestep.

    ``connectivity_missing`` marks frames whose raw network file was absent;
    their connectivity is an explicit all-zero matrix.
    """

    scenario_id: str
    timestep: int
    columns: dict[str, np.ndarray]
    connectivity: AreaConnectivity
    connectivity_missing: bool = False

    def __post_init__(self) -> None:
        if self.timestep < 0:
            raise ValidationError(f"timestep {self.timestep} is negative")
        missing = set(COLUMN_ORDER) - set(self.columns)
        extra = set(self.columns) - set(COLUMN_ORDER)
        if missing or extra:
            raise ValidationError(f"bad column set: missing={sorted(missing)} extra={sorted(extra)}")
        n = self.columns["calcium"].shape[0]
        coerced = {}
        for name in COLUMN_ORDER:
            col = np.ascontiguousarray(self.columns[name], dtype=COLUMN_DTYPES[name])
            if col.shape != (n,):
                raise ValidationError(f"column {name} has shape {col.shape}, expected ({n},)")
            col.setflags(write=False)
            coerced[name] = col
        if coerced["fired"].max(initial=0) > 1:
            raise ValidationError("fired column must be 0/1")
        ff = coerced["fired_fraction"]
        if ff.size and (ff.min() < 0.0 or ff.max() > 1.0):
            raise ValidationError("fired_fraction must lie in [0, 1]")
        object.__setattr__(self, "columns", coerced)

    @property
    def neuron_count(self) -> int:
        return self.columns["calcium"].shape[0]

    @property
    def area_count(self) -> int:
        return self.connectivity.area_count

    @property
    def coordinate(self) -> tuple[str, int]:
        return (self.scenario_id, self.timestep)


@dataclass(frozen=True)
class DiffFrame:
    """Signed per-neuron and per-area-pair deltas between two frames (other - base)."""

    base: tuple[str, int]
    other: tuple[str, int]
    column_deltas: dict[str, np.ndarray]
    connectivity_delta: np.ndarray

    def __post_init__(self) -> None:
        delta = np.ascontiguousarray(self.connectivity_delta, dtype=np.int64)
        if delta.ndim != 2 or delta.shape[0] != delta.shape[1]:
            raise ValidationError(f"connectivity delta must be square, got {delta.shape}")
        delta.setflags(write=False)
        object.__setattr__(self, "connectivity_delta", delta)
        coerced = {}
        n = None
        for name in COLUMN_ORDER:
            if name not in self.column_deltas:
                raise ValidationError(f"missing delta column {name}")
            col = np.ascontiguousarray(self.column_deltas[name], dtype=DELTA_DTYPES[name])
            if n is None:
                n = col.shape[0]
            if col.shape != (n,):
                raise ValidationError(f"delta column {name} has shape {col.shape}, expected ({n},)")
            col.setflags(write=False)
            coerced[name] = col
        object.__setattr__(self, "column_deltas", coerced)

    @property
    def neuron_count(self) -> int:
        return self.column_deltas["calcium"].shape[0]

    @property
    def area_count(self) -> int:
        return self.connectivity_delta.shape[0]


@dataclass(frozen=True)
class ScenarioInfo:
    id: str
    name: str


@dataclass
class ScenarioCatalog:
    """Everything a client needs to enumerate the store: scenarios, their
    recorded timesteps, the area table, and per-scenario global ranges."""

    scenarios: list[ScenarioInfo]
    timesteps: dict[str, list[int]]
    neuron_count: int
    area_table: list[str]
    global_ranges: dict[str, dict[str, PropertyRange]]

    def __post_init__(self) -> None:
        ids = [s.id for s in self.scenarios]
        if len(ids) != len(set(ids)):
            raise ValidationError("scenario ids must be unique")
        for sid in ids:
            if sid not in self.timesteps:
                raise ValidationError(f"scenario {sid} has no timestep list")

    @property
    def scenario_ids(self) -> list[str]:
        return [s.id for s in self.scenarios]

    def has_frame(self, scenario_id: str, timestep: int) -> bool:
        return scenario_id in self.timesteps and timestep in self.timesteps[scenario_id]

    def to_json_dict(self) -> dict:
        return {
            "neuron_count": self.neuron_count,
            "area_table": list(self.area_table),
            "scenarios": [{"id": s.id, "name": s.name} for s in self.scenarios],
            "timesteps": {sid: list(ts) for sid, ts in self.timesteps.items()},
            "global_ranges": {
                sid: {prop: {"min": r.min, "max": r.max} for prop, r in ranges.items()}
                for sid, ranges in self.global_ranges.items()
            },
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "ScenarioCatalog":
        try:
            return cls(
                scenarios=[ScenarioInfo(s["id"], s["name"]) for s in doc["scenarios"]],
                timesteps={sid: [int(t) for t in ts] for sid, ts in doc["timesteps"].items()},
                neuron_count=int(doc["neuron_count"]),
                area_table=list(doc["area_table"]),
                global_ranges={
                    sid: {prop: PropertyRange(float(r["min"]), float(r["max"])) for prop, r in ranges.items()}
                    for sid, ranges in doc["global_ranges"].items()
                },
            )
        except (KeyError, TypeError) as exc:
            raise FormatError(f"catalog document is missing or mistypes a field: {exc}") from exc


def property_column(
    frame: TimestepFrame, prop: NeuronProperty | str, statics: StaticTable | None = None
) -> np.ndarray:
    """Resolve a property to its dense per-neuron value array.

    ``area`` is answered from static data, everything else from the frame.
    """
    name = NeuronProperty(prop).value
    if name == NeuronProperty.AREA.value:
        if statics is None:
            raise ValidationError("area property requires static data")
        if len(statics) != frame.neuron_count:
            raise ValidationError("static table size does not match frame")
        return statics.area_ids
    return frame.columns[name]


def property_value(
    frame: TimestepFrame,
    prop: NeuronProperty | str,
    neuron_id: int,
    statics: StaticTable | None = None,
) -> float:
    """Value of one property for one neuron, as a plain float."""
    if not 0 <= neuron_id < frame.neuron_count:
        raise IndexError(f"neuron_id {neuron_id} out of range 0..{frame.neuron_count - 1}")
    return float(property_column(frame, prop, statics)[neuron_id])


def frames_equal(a: TimestepFrame, b: TimestepFrame) -> bool:
    """Bit-exact frame equality over coordinate, columns, and connectivity."""
    if a.coordinate != b.coordinate or a.connectivity_missing != b.connectivity_missing:
        return False
    if a.neuron_count != b.neuron_count or a.area_count != b.area_count:
        return False
    for name in COLUMN_ORDER:
        if not np.array_equal(a.columns[name], b.columns[name]):
            return False
    return np.array_equal(a.connectivity.counts, b.connectivity.counts)
