"""Raw-layout parsing and the per-timestep transposition pipeline.

Raw simulation output is stored per neuron; the visualization needs it per
timestep. ``transpose_scenario`` streams every monitor file in lockstep and
emits one complete :class:`~plastiscope.model.TimestepFrame` per recorded
step, so peak memory stays O(N + A^2) per in-flight timestep no matter how
long the simulation ran.

Raw layout (all files UTF-8 text, LF or CRLF):

* ``positions.txt``          rows ``id x y z area_name``
* ``<scenario>/neurons/<id>.csv``   header ``step;fired;calcium;target;axons;dendrites;syn_in;syn_out``
* ``<scenario>/network/step_<t>.txt``  rows ``target_id source_id weight``
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import reduce
from pathlib import Path
from typing import Iterator

import numpy as np
import pyarrow.csv

from . import aggregate
from .model import (
    CANONICAL_SCENARIOS,
    CLUSTER_SIZE,
    AreaConnectivity,
    FormatError,
    StaticTable,
    TimestepFrame,
    ValidationError,
)

logger = logging.getLogger(__name__)

MONITOR_HEADER = "step;fired;calcium;target;axons;dendrites;syn_in;syn_out"
MONITOR_FIELDS = 8

#: Trailing window (in recorded steps) for the fired_fraction column. Before
#: the window fills, the mean divides by the number of steps seen so far.
FIRED_WINDOW = 100

#: Recorded steps parsed per streaming round; bounds buffered rows at
#: chunk_steps x N while keeping the number of file-open cycles low.
DEFAULT_CHUNK_STEPS = 32

#: Fixed per-scenario substream indices so a scenario's data is identical
#: no matter which subset of scenarios is generated.
_SCENARIO_STREAMS = {
    "no_connectivity": 1,
    "learning": 2,
    "injury": 3,
    "calcium_targets": 4,
}
_POSITIONS_STREAM = 0


@dataclass(frozen=True)
class RawDatasetLayout:
    """Locations of one raw dataset: shared positions file plus one directory
    per scenario holding ``neurons/`` monitor files and ``network/`` files."""

    root: Path
    positions_path: Path
    scenario_dirs: dict[str, Path]

    @classmethod
    def discover(cls, root: Path | str) -> "RawDatasetLayout":
        root = Path(root)
        positions = root / "positions.txt"
        if not positions.is_file():
            raise FormatError(f"no positions.txt under {root}")
        dirs = {
            p.name: p
            for p in sorted(root.iterdir())
            if p.is_dir() and (p / "neurons").is_dir()
        }
        if not dirs:
            raise FormatError(f"no scenario directories (with neurons/) under {root}")
        return cls(root=root, positions_path=positions, scenario_dirs=dirs)

    def scenario_ids(self) -> list[str]:
        return sorted(self.scenario_dirs, key=scenario_sort_key)


def scenario_sort_key(scenario_id: str) -> tuple[int, str]:
    """Canonical scenarios in paper order, anything else alphabetical after."""
    canonical = list(CANONICAL_SCENARIOS)
    if scenario_id in canonical:
        return (canonical.index(scenario_id), scenario_id)
    return (len(canonical), scenario_id)


def parse_positions(path: Path | str) -> StaticTable:
    """Parse the positions file into a static table ordered by neuron id.

    The area table is deduplicated in first-appearance (file) order. Ids must
    form exactly 0..N-1 and every cluster of 10 must be complete.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    ids: list[int] = []
    coords: list[tuple[float, float, float]] = []
    names: list[str] = []
    area_index: dict[str, int] = {}
    area_of: list[int] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        fields = line.split()
        if len(fields) != 5:
            raise FormatError(f"{path}:{lineno}: expected 5 fields, got {len(fields)}")
        try:
            neuron_id = int(fields[0])
            xyz = (float(fields[1]), float(fields[2]), float(fields[3]))
        except ValueError as exc:
            raise FormatError(f"{path}:{lineno}: non-numeric id or coordinate") from exc
        name = fields[4]
        if name not in area_index:
            area_index[name] = len(names)
            names.append(name)
        ids.append(neuron_id)
        coords.append(xyz)
        area_of.append(area_index[name])
    n = len(ids)
    if n == 0:
        raise FormatError(f"{path}: empty positions file")
    id_arr = np.asarray(ids, dtype=np.int64)
    order = np.argsort(id_arr, kind="stable")
    sorted_ids = id_arr[order]
    dup = np.nonzero(np.diff(sorted_ids) == 0)[0]
    if dup.size:
        raise FormatError(f"{path}: duplicate neuron id {int(sorted_ids[dup[0]])}")
    if sorted_ids[0] != 0 or sorted_ids[-1] != n - 1:
        raise FormatError(f"{path}: neuron ids must form 0..{n - 1}")
    if n % CLUSTER_SIZE != 0:
        raise ValidationError(
            f"{path}: {n} neurons cannot form complete clusters of {CLUSTER_SIZE}"
        )
    positions = np.asarray(coords, dtype=np.float32)[order]
    area_ids = np.asarray(area_of, dtype=np.uint32)[order]
    return StaticTable(positions=positions, area_ids=area_ids, area_names=names)


class _MonitorCursor:
    """Byte-offset cursor into one monitor file.

    The file is reopened per round and read strictly forward, so thousands
    of cursors can stream in lockstep without holding open descriptors.
    """

    __slots__ = ("path", "neuron_id", "offset", "header_read", "exhausted")

    def __init__(self, path: Path, neuron_id: int):
        self.path = path
        self.neuron_id = neuron_id
        self.offset = 0
        self.header_read = False
        self.exhausted = False

    def read_chunk(self, max_rows: int) -> np.ndarray:
        """Next <= max_rows rows as a (rows, 8) float64 array."""
        try:
            fh = open(self.path, "rb")
        except FileNotFoundError as exc:
            raise FormatError(f"monitor file missing for neuron {self.neuron_id}: {self.path}") from exc
        with fh:
            fh.seek(self.offset)
            if not self.header_read:
                header = fh.readline().decode("utf-8", errors="replace").strip()
                if header != MONITOR_HEADER:
                    raise FormatError(
                        f"{self.path}: bad monitor header {header!r}, expected {MONITOR_HEADER!r}"
                    )
                self.header_read = True
            lines = []
            for _ in range(max_rows):
                line = fh.readline()
                if not line:
                    self.exhausted = True
                    break
                lines.append(line)
            self.offset = fh.tell()
        if not lines:
            return np.empty((0, MONITOR_FIELDS), dtype=np.float64)
        return self._parse(lines)

    def _parse(self, lines: list[bytes]) -> np.ndarray:
        tokens = b" ".join(lines).replace(b";", b" ").split()
        if len(tokens) != MONITOR_FIELDS * len(lines):
            self._raise_bad_line(lines)
        try:
            values = np.array(tokens, dtype=np.float64)
        except ValueError:
            self._raise_bad_line(lines)
        return values.reshape(len(lines), MONITOR_FIELDS)

    def _raise_bad_line(self, lines: list[bytes]) -> None:
        for i, line in enumerate(lines):
            fields = line.replace(b";", b" ").split()
            ok = len(fields) == MONITOR_FIELDS
            if ok:
                try:
                    [float(f) for f in fields]
                except ValueError:
                    ok = False
            if not ok:
                raise FormatError(
                    f"{self.path}: malformed monitor line "
                    f"{line.decode('utf-8', errors='replace').strip()!r}"
                )
        raise FormatError(f"{self.path}: malformed monitor data")


def _read_network_file(path: Path) -> np.ndarray:
    """(M, 2) int64 array of (target_id, source_id); weights are ignored."""
    if path.stat().st_size == 0:
        return np.empty((0, 2), dtype=np.int64)
    table = pyarrow.csv.read_csv(
        path,
        read_options=pyarrow.csv.ReadOptions(
            column_names=["target", "source", "weight"], use_threads=False
        ),
        parse_options=pyarrow.csv.ParseOptions(delimiter=" "),
        convert_options=pyarrow.csv.ConvertOptions(
            column_types={
                "target": pyarrow.int64(),
                "source": pyarrow.int64(),
                "weight": pyarrow.float64(),
            }
        ),
    )
    out = np.empty((table.num_rows, 2), dtype=np.int64)
    out[:, 0] = table.column("target").to_numpy()
    out[:, 1] = table.column("source").to_numpy()
    return out


def transpose_scenario(
    layout: RawDatasetLayout,
    scenario_id: str,
    statics: StaticTable | None = None,
    chunk_steps: int = DEFAULT_CHUNK_STEPS,
) -> Iterator[TimestepFrame]:
    """Stream one scenario's raw data into per-timestep frames.

    Frames come out in ascending timestep order with fired_fraction computed
    as a trailing window mean (window :data:`FIRED_WINDOW`, dividing by the
    number of recorded steps while the window is still filling) and
    calcium_target_delta as the signed calcium - target. Connectivity is
    aggregated area-to-area from the step's network file; a missing network
    file yields an all-zero matrix flagged ``connectivity_missing`` plus a
    warning record.
    """
    if statics is None:
        statics = parse_positions(layout.positions_path)
    try:
        scenario_dir = layout.scenario_dirs[scenario_id]
    except KeyError:
        raise ValidationError(f"unknown scenario {scenario_id!r} in {layout.root}") from None
    neurons_dir = scenario_dir / "neurons"
    network_dir = scenario_dir / "network"
    n = len(statics)
    cursors = [_MonitorCursor(neurons_dir / f"{i}.csv", i) for i in range(n)]

    ring = np.zeros((FIRED_WINDOW, n), dtype=np.int32)
    ring_sum = np.zeros(n, dtype=np.int32)
    steps_seen = 0

    while True:
        first = cursors[0].read_chunk(chunk_steps)
        steps = first[:, 0]
        rows = first.shape[0]
        if rows:
            if np.any(steps % 1 != 0) or np.any(steps < 0):
                raise FormatError(f"{cursors[0].path}: non-integer or negative step index")
            if rows > 1 and np.any(np.diff(steps) <= 0):
                raise FormatError(f"{cursors[0].path}: steps not strictly ascending")
        chunk = np.empty((n, rows, MONITOR_FIELDS), dtype=np.float64)
        chunk[0] = first
        for cursor in cursors[1:]:
            arr = cursor.read_chunk(rows if rows else chunk_steps)
            if arr.shape[0] != rows or not np.array_equal(arr[:, 0], steps):
                raise ValidationError(
                    f"monitor files disagree on the recorded timestep set: "
                    f"neuron {cursor.neuron_id} differs from neuron 0"
                )
            chunk[cursor.neuron_id] = arr
        if rows == 0:
            break

        for k in range(rows):
            t = int(steps[k])
            fired = chunk[:, k, 1]
            if fired.max(initial=0) > 1 or fired.min(initial=0) < 0 or np.any(fired % 1 != 0):
                raise FormatError(f"scenario {scenario_id} step {t}: fired flags must be 0/1")
            counts = chunk[:, k, 6:8]
            if np.any(counts % 1 != 0) or np.any(counts < 0):
                raise FormatError(
                    f"scenario {scenario_id} step {t}: synapse counts must be non-negative integers"
                )
            fired_i = fired.astype(np.int32)
            slot = steps_seen % FIRED_WINDOW
            if steps_seen >= FIRED_WINDOW:
                ring_sum -= ring[slot]
            ring[slot] = fired_i
            ring_sum += fired_i
            steps_seen += 1
            window = min(steps_seen, FIRED_WINDOW)
            calcium = chunk[:, k, 2].astype(np.float32)
            target = chunk[:, k, 3].astype(np.float32)
            columns = {
                "calcium": calcium,
                "calcium_target_delta": calcium - target,
                "fired": fired.astype(np.uint8),
                "fired_fraction": ring_sum.astype(np.float32) / np.float32(window),
                "grown_axons": chunk[:, k, 4].astype(np.float32),
                "grown_dendrites": chunk[:, k, 5].astype(np.float32),
                "synapses_in": chunk[:, k, 6].astype(np.uint32),
                "synapses_out": chunk[:, k, 7].astype(np.uint32),
            }
            network_path = network_dir / f"step_{t}.txt"
            if network_path.is_file():
                connectivity = aggregate.aggregate_connectivity(
                    _read_network_file(network_path), statics
                )
                missing = False
            else:
                logger.warning(
                    "network file missing for scenario %s step %d; "
                    "emitting empty connectivity",
                    scenario_id,
                    t,
                )
                connectivity = AreaConnectivity.zeros(statics.area_count)
                missing = True
            yield TimestepFrame(
                scenario_id=scenario_id,
                timestep=t,
                columns=columns,
                connectivity=connectivity,
                connectivity_missing=missing,
            )


# ---------------------------------------------------------------------------
# Synthetic dataset generation
# ---------------------------------------------------------------------------


def generate_synthetic(
    output_root: Path | str,
    n_clusters: int,
    n_areas: int,
    n_timesteps: int,
    seed: int,
    scenarios: list[str] | None = None,
    jitter: float = 1.0,
) -> RawDatasetLayout:
    """Write a deterministic synthetic raw layout.

    10 * n_clusters neurons sit at ellipsoidal cluster centers with offsets
    bounded by ``jitter``; calcium performs a seeded random walk toward its
    target and synapse events churn per scenario. Identical arguments give
    a byte-identical tree. ``scenarios`` defaults to all four canonical
    scenarios; each scenario's content depends only on (seed, scenario), not
    on which subset is generated.
    """
    if n_clusters < 1:
        raise ValidationError(f"n_clusters must be >= 1, got {n_clusters}")
    if n_areas < 1:
        raise ValidationError(f"n_areas must be >= 1, got {n_areas}")
    if n_timesteps < 1:
        raise ValidationError(f"n_timesteps must be >= 1, got {n_timesteps}")
    if scenarios is None:
        scenarios = list(CANONICAL_SCENARIOS)
    unknown = set(scenarios) - set(_SCENARIO_STREAMS)
    if unknown:
        raise ValidationError(f"unknown scenarios {sorted(unknown)}")

    root = Path(output_root)
    root.mkdir(parents=True, exist_ok=True)
    n = n_clusters * CLUSTER_SIZE

    rng = np.random.default_rng(np.random.SeedSequence([seed, _POSITIONS_STREAM]))
    centers = _ellipsoid_points(rng, n_clusters, radii=(70.0, 85.0, 60.0))
    azimuth = np.arctan2(centers[:, 1], centers[:, 0])
    cluster_area = np.clip(
        ((azimuth + math.pi) / (2.0 * math.pi) * n_areas).astype(np.int64), 0, n_areas - 1
    )
    direction = rng.normal(size=(n, 3))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    radius = (jitter / 2.0) * np.cbrt(rng.random(n))
    positions = np.repeat(centers, CLUSTER_SIZE, axis=0) + direction * radius[:, None]
    area_of_neuron = np.repeat(cluster_area, CLUSTER_SIZE)

    width = max(2, len(str(n_areas - 1)))
    area_names = [f"area_{k:0{width}d}" for k in range(n_areas)]
    lines = [
        f"{i} {positions[i, 0]:.3f} {positions[i, 1]:.3f} {positions[i, 2]:.3f} "
        f"{area_names[area_of_neuron[i]]}"
        for i in range(n)
    ]
    _write_text(root / "positions.txt", "\n".join(lines) + "\n")

    for scenario_id in scenarios:
        scenario_rng = np.random.default_rng(
            np.random.SeedSequence([seed, 100 + _SCENARIO_STREAMS[scenario_id]])
        )
        _generate_scenario(
            root / scenario_id, scenario_id, n, n_timesteps, area_of_neuron, scenario_rng
        )
    return RawDatasetLayout.discover(root)


def _ellipsoid_points(rng: np.random.Generator, count: int, radii: tuple[float, float, float]) -> np.ndarray:
    points: list[np.ndarray] = []
    have = 0
    while have < count:
        cand = rng.uniform(-1.0, 1.0, size=(max(64, 2 * (count - have)), 3))
        keep = cand[(cand**2).sum(axis=1) <= 1.0]
        points.append(keep)
        have += keep.shape[0]
    return np.concatenate(points)[:count] * np.asarray(radii)


def _generate_scenario(
    scenario_dir: Path,
    scenario_id: str,
    n: int,
    n_timesteps: int,
    area_of_neuron: np.ndarray,
    rng: np.random.Generator,
) -> None:
    neurons_dir = scenario_dir / "neurons"
    network_dir = scenario_dir / "network"
    neurons_dir.mkdir(parents=True, exist_ok=True)
    network_dir.mkdir(parents=True, exist_ok=True)

    if scenario_id == "calcium_targets":
        target = np.round(rng.uniform(0.3, 0.7, n), 2)
    else:
        target = np.full(n, 0.5)
    calcium = np.clip(rng.normal(0.35, 0.05, n), 0.05, 0.95)
    axons = rng.uniform(1.0, 4.0, n)
    dendrites = rng.uniform(1.0, 4.0, n)

    if scenario_id == "no_connectivity":
        tgt = np.empty(0, dtype=np.int64)
        src = np.empty(0, dtype=np.int64)
        birth_rate, death_rate = 0.08, 0.0
    else:
        m0 = 3 * n
        tgt = rng.integers(0, n, m0)
        src = rng.integers(0, n, m0)
        birth_rate, death_rate = 0.05, 0.03

    injury_step = n_timesteps // 2 if scenario_id == "injury" and n_timesteps >= 2 else None
    injured = area_of_neuron == 0

    fired_hist = np.empty((n_timesteps, n), dtype=np.uint8)
    cal_hist = np.empty((n_timesteps, n))
    tgt_hist = np.empty((n_timesteps, n))
    ax_hist = np.empty((n_timesteps, n))
    dn_hist = np.empty((n_timesteps, n))
    sin_hist = np.empty((n_timesteps, n), dtype=np.int64)
    sout_hist = np.empty((n_timesteps, n), dtype=np.int64)

    for t in range(n_timesteps):
        if injury_step is not None and t == injury_step:
            calcium = np.where(injured, calcium * 0.3, calcium)
            keep = ~(injured[tgt] | injured[src])
            tgt, src = tgt[keep], src[keep]
        deaths = min(tgt.size, int(rng.poisson(death_rate * n)))
        if deaths:
            doomed = rng.choice(tgt.size, size=deaths, replace=False)
            keep = np.ones(tgt.size, dtype=bool)
            keep[doomed] = False
            tgt, src = tgt[keep], src[keep]
        rate = birth_rate * 0.5 if injury_step is not None and t > injury_step else birth_rate
        births = int(rng.poisson(rate * n))
        if births:
            new_tgt = rng.integers(0, n, births)
            new_src = rng.integers(0, n, births)
            if injury_step is not None and t >= injury_step:
                keep = ~(injured[new_tgt] | injured[new_src])
                new_tgt, new_src = new_tgt[keep], new_src[keep]
            tgt = np.concatenate([tgt, new_tgt])
            src = np.concatenate([src, new_src])
        weights = np.round(rng.uniform(0.1, 1.0, tgt.size), 3)
        _write_network_file(network_dir / f"step_{t}.txt", tgt, src, weights)

        fired_hist[t] = rng.random(n) < np.clip(calcium * 0.9, 0.02, 0.85)
        cal_hist[t] = calcium
        tgt_hist[t] = target
        ax_hist[t] = axons
        dn_hist[t] = dendrites
        sin_hist[t] = np.bincount(tgt, minlength=n)
        sout_hist[t] = np.bincount(src, minlength=n)

        calcium = np.clip(calcium + 0.02 * (target - calcium) + rng.normal(0.0, 0.008, n), 0.02, 0.98)
        axons = axons + np.clip(rng.normal(0.02, 0.01, n), 0.0, None)
        dendrites = dendrites + np.clip(rng.normal(0.02, 0.01, n), 0.0, None)

    _write_monitor_files(
        neurons_dir, fired_hist, cal_hist, tgt_hist, ax_hist, dn_hist, sin_hist, sout_hist
    )


def _write_network_file(path: Path, tgt: np.ndarray, src: np.ndarray, weights: np.ndarray) -> None:
    if tgt.size == 0:
        _write_text(path, "")
        return
    lines = reduce(
        np.char.add,
        (
            np.char.mod("%d", tgt),
            " ",
            np.char.mod("%d", src),
            " ",
            np.char.mod("%.3f", weights),
        ),
    )
    _write_text(path, "\n".join(lines.tolist()) + "\n")


def _write_monitor_files(
    neurons_dir: Path,
    fired: np.ndarray,
    calcium: np.ndarray,
    target: np.ndarray,
    axons: np.ndarray,
    dendrites: np.ndarray,
    syn_in: np.ndarray,
    syn_out: np.ndarray,
) -> None:
    n_timesteps = fired.shape[0]
    steps = np.char.mod("%d", np.arange(n_timesteps))[:, None]
    lines = reduce(
        np.char.add,
        (
            steps,
            ";",
            np.char.mod("%d", fired),
            ";",
            np.char.mod("%.4f", calcium),
            ";",
            np.char.mod("%.4f", target),
            ";",
            np.char.mod("%.2f", axons),
            ";",
            np.char.mod("%.2f", dendrites),
            ";",
            np.char.mod("%d", syn_in),
            ";",
            np.char.mod("%d", syn_out),
        ),
    )
    for i in range(fired.shape[1]):
        body = "\n".join(lines[:, i].tolist())
        _write_text(neurons_dir / f"{i}.csv", f"{MONITOR_HEADER}\n{body}\n")


def _write_text(path: Path, content: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(content)
