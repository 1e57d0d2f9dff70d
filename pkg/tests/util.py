"""Small factories shared across test modules."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from plastiscope.model import (
    CLUSTER_SIZE,
    AreaConnectivity,
    StaticTable,
    TimestepFrame,
)

MONITOR_HEADER = "step;fired;calcium;target;axons;dendrites;syn_in;syn_out"


def make_statics(n_clusters: int = 2, n_areas: int = 2, seed: int = 0) -> StaticTable:
    rng = np.random.default_rng(seed)
    n = n_clusters * CLUSTER_SIZE
    centers = rng.uniform(-50, 50, size=(n_clusters, 3))
    positions = np.repeat(centers, CLUSTER_SIZE, axis=0) + rng.uniform(-0.4, 0.4, size=(n, 3))
    cluster_area = np.arange(n_clusters) % n_areas
    area_ids = np.repeat(cluster_area, CLUSTER_SIZE).astype(np.uint32)
    names = [f"area_{k:02d}" for k in range(n_areas)]
    return StaticTable(positions=positions.astype(np.float32), area_ids=area_ids, area_names=names)


def make_frame(
    n: int = 20,
    n_areas: int = 2,
    scenario_id: str = "learning",
    timestep: int = 0,
    seed: int = 0,
    connectivity: np.ndarray | None = None,
) -> TimestepFrame:
    rng = np.random.default_rng(seed)
    calcium = rng.uniform(0.1, 0.9, n).astype(np.float32)
    if connectivity is None:
        connectivity = rng.integers(0, 50, size=(n_areas, n_areas)).astype(np.uint32)
    return TimestepFrame(
        scenario_id=scenario_id,
        timestep=timestep,
        columns={
            "calcium": calcium,
            "calcium_target_delta": (calcium - np.float32(0.5)),
            "fired": (rng.random(n) < 0.4).astype(np.uint8),
            "fired_fraction": rng.uniform(0, 1, n).astype(np.float32),
            "grown_axons": rng.uniform(1, 5, n).astype(np.float32),
            "grown_dendrites": rng.uniform(1, 5, n).astype(np.float32),
            "synapses_in": rng.integers(0, 12, n).astype(np.uint32),
            "synapses_out": rng.integers(0, 12, n).astype(np.uint32),
        },
        connectivity=AreaConnectivity(connectivity),
    )


def write_monitor(path: Path, rows: list[tuple]) -> None:
    """rows of (step, fired, calcium, target, axons, dendrites, syn_in, syn_out)."""
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [MONITOR_HEADER]
    for row in rows:
        lines.append(";".join(str(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_raw_layout(
    root: Path,
    scenario_id: str,
    monitor_rows: dict[int, list[tuple]],
    networks: dict[int, list[tuple]] | None = None,
    positions: list[str] | None = None,
) -> Path:
    """Write a hand-rolled raw layout for one scenario.

    ``monitor_rows`` maps neuron id -> monitor rows; ``networks`` maps
    timestep -> (target, source, weight) rows.
    """
    if positions is None:
        n = len(monitor_rows)
        positions = [f"{i} {float(i)} 0.0 0.0 area_a" for i in range(n)]
    (root).mkdir(parents=True, exist_ok=True)
    (root / "positions.txt").write_text("\n".join(positions) + "\n", encoding="utf-8")
    for neuron_id, rows in monitor_rows.items():
        write_monitor(root / scenario_id / "neurons" / f"{neuron_id}.csv", rows)
    network_dir = root / scenario_id / "network"
    network_dir.mkdir(parents=True, exist_ok=True)
    for t, rows in (networks or {}).items():
        text = "\n".join(f"{a} {b} {w}" for a, b, w in rows)
        (network_dir / f"step_{t}.txt").write_text(text + ("\n" if text else ""), encoding="utf-8")
    return root
