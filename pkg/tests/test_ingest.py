import hashlib
import logging
from pathlib import Path

import numpy as np
import pytest

from plastiscope import ingest
from plastiscope.model import CLUSTER_SIZE, FormatError, ValidationError, frames_equal

from .util import write_raw_layout


def tree_digest(root: Path) -> str:
    """Stable digest over relative paths and file contents."""
    digest = hashlib.sha256()
    for path in sorted(root.rglob("*")):
        if path.is_file():
            digest.update(str(path.relative_to(root)).encode())
            digest.update(path.read_bytes())
    return digest.hexdigest()


# -- parse_positions


def test_parse_minimal_positions(tmp_path):
    rows = [f"{i} {i * 1.5} 2.0 -3.25 {'left' if i < 10 else 'right'}" for i in range(20)]
    path = tmp_path / "positions.txt"
    path.write_text("\n".join(rows) + "\n")
    statics = ingest.parse_positions(path)
    assert len(statics) == 20
    assert statics.area_names == ["left", "right"]
    assert statics.cluster_count == 2
    assert statics.record(13).cluster_id == 1
    assert statics.record(13).cluster_slot == 3
    assert statics.positions[4, 0] == np.float32(6.0)


def test_parse_positions_orders_by_id_and_keeps_first_appearance_areas(tmp_path):
    rows = [f"{i} 0.0 0.0 0.0 {'b' if i < 10 else 'a'}" for i in reversed(range(20))]
    path = tmp_path / "positions.txt"
    path.write_text("\n".join(rows) + "\n")
    statics = ingest.parse_positions(path)
    # file starts with id 19 (area "a"), so "a" is first in the table
    assert statics.area_names == ["a", "b"]
    assert statics.area_ids[0] == 1
    assert statics.area_ids[19] == 0


def test_parse_positions_duplicate_id(tmp_path):
    rows = [f"{i} 0 0 0 a" for i in range(20)]
    rows[7] = "5 0 0 0 a"
    path = tmp_path / "positions.txt"
    path.write_text("\n".join(rows) + "\n")
    with pytest.raises(FormatError, match="duplicate"):
        ingest.parse_positions(path)


def test_parse_positions_bad_coordinate(tmp_path):
    path = tmp_path / "positions.txt"
    path.write_text("0 0 zero 0 a\n")
    with pytest.raises(FormatError, match="non-numeric"):
        ingest.parse_positions(path)


def test_parse_positions_partial_cluster(tmp_path):
    rows = [f"{i} 0 0 0 a" for i in range(15)]
    path = tmp_path / "positions.txt"
    path.write_text("\n".join(rows) + "\n")
    with pytest.raises(ValidationError):
        ingest.parse_positions(path)


def test_parse_positions_noncontiguous_ids(tmp_path):
    rows = [f"{i} 0 0 0 a" for i in list(range(10)) + list(range(20, 30))]
    path = tmp_path / "positions.txt"
    path.write_text("\n".join(rows) + "\n")
    with pytest.raises(FormatError, match="0..19"):
        ingest.parse_positions(path)


# -- generate_synthetic


def test_generator_is_deterministic(tmp_path):
    a = ingest.generate_synthetic(tmp_path / "a", 2, 2, 4, seed=42)
    b = ingest.generate_synthetic(tmp_path / "b", 2, 2, 4, seed=42)
    assert tree_digest(a.root) == tree_digest(b.root)
    c = ingest.generate_synthetic(tmp_path / "c", 2, 2, 4, seed=43)
    assert tree_digest(a.root) != tree_digest(c.root)


def test_generator_minimal_case(tmp_path):
    layout = ingest.generate_synthetic(tmp_path / "raw", 1, 1, 1, seed=0)
    statics = ingest.parse_positions(layout.positions_path)
    assert len(statics) == CLUSTER_SIZE
    assert statics.area_count == 1
    frames = list(ingest.transpose_scenario(layout, "learning", statics))
    assert len(frames) == 1


def test_generator_scenario_subset_matches_full_run(tmp_path):
    full = ingest.generate_synthetic(tmp_path / "full", 2, 2, 3, seed=5)
    only = ingest.generate_synthetic(tmp_path / "only", 2, 2, 3, seed=5, scenarios=["learning"])
    assert sorted(only.scenario_dirs) == ["learning"]
    assert tree_digest(only.scenario_dirs["learning"]) == tree_digest(full.scenario_dirs["learning"])


def test_generator_respects_jitter_bound(tiny_raw, tiny_statics):
    positions = tiny_statics.positions.reshape(-1, CLUSTER_SIZE, 3)
    for cluster in positions:
        span = np.linalg.norm(cluster[:, None, :] - cluster[None, :, :], axis=2)
        assert span.max() <= 1.0 + 1e-6


def test_generator_rejects_bad_arguments(tmp_path):
    with pytest.raises(ValidationError):
        ingest.generate_synthetic(tmp_path, 0, 1, 1, seed=0)
    with pytest.raises(ValidationError):
        ingest.generate_synthetic(tmp_path, 1, 1, 1, seed=0, scenarios=["nope"])


def test_layout_discovers_four_scenarios(tiny_raw):
    assert sorted(tiny_raw.scenario_dirs) == [
        "calcium_targets",
        "injury",
        "learning",
        "no_connectivity",
    ]
    assert tiny_raw.scenario_ids()[0] == "no_connectivity"


# -- transpose_scenario


def test_transpose_shapes(tmp_path):
    rows = {
        0: [(0, 1, 0.5, 0.5, 1.0, 1.0, 0, 0), (1, 0, 0.6, 0.5, 1.1, 1.0, 1, 0), (2, 1, 0.7, 0.5, 1.2, 1.0, 0, 1)],
        1: [(0, 0, 0.4, 0.5, 2.0, 2.0, 0, 0), (1, 1, 0.3, 0.5, 2.1, 2.0, 0, 1), (2, 0, 0.2, 0.5, 2.2, 2.0, 1, 0)],
    }
    positions = [f"{i} 0 0 0 a" for i in range(10)]
    for i in range(2, 10):
        rows[i] = [(t, 0, 0.5, 0.5, 1.0, 1.0, 0, 0) for t in range(3)]
    root = write_raw_layout(tmp_path, "learning", rows, networks={t: [] for t in range(3)}, positions=positions)
    layout = ingest.RawDatasetLayout.discover(root)
    frames = list(ingest.transpose_scenario(layout, "learning"))
    assert [f.timestep for f in frames] == [0, 1, 2]
    assert all(f.neuron_count == 10 for f in frames)
    assert frames[1].columns["calcium"][0] == np.float32(0.6)
    assert frames[2].columns["synapses_in"][1] == 1


def test_fired_fraction_divides_by_steps_seen(tmp_path):
    # fires on the first two of three recorded steps -> 2/3 at the third
    rows = {}
    for i in range(10):
        fired = [1, 1, 0] if i == 0 else [0, 0, 0]
        rows[i] = [(t, fired[t], 0.5, 0.5, 1.0, 1.0, 0, 0) for t in range(3)]
    root = write_raw_layout(tmp_path, "learning", rows, networks={t: [] for t in range(3)})
    layout = ingest.RawDatasetLayout.discover(root)
    frames = list(ingest.transpose_scenario(layout, "learning"))
    ff = [float(f.columns["fired_fraction"][0]) for f in frames]
    assert ff[0] == 1.0
    assert ff[1] == 1.0
    assert ff[2] == np.float32(np.float32(2.0) / np.float32(3.0))


def test_fired_fraction_trailing_window_rolls_off(tmp_path):
    steps = ingest.FIRED_WINDOW + 20
    rows = {}
    for i in range(10):
        fired = [1 if t < 10 else 0 for t in range(steps)] if i == 0 else [0] * steps
        rows[i] = [(t, fired[t], 0.5, 0.5, 1.0, 1.0, 0, 0) for t in range(steps)]
    root = write_raw_layout(tmp_path, "learning", rows, networks={})
    layout = ingest.RawDatasetLayout.discover(root)
    frames = list(ingest.transpose_scenario(layout, "learning"))
    ff = np.array([f.columns["fired_fraction"][0] for f in frames])
    # all ten firings inside the window until it starts rolling off
    assert ff[ingest.FIRED_WINDOW - 1] == np.float32(10.0 / ingest.FIRED_WINDOW)
    assert ff[ingest.FIRED_WINDOW + 4] == np.float32(5.0 / ingest.FIRED_WINDOW)
    assert ff[ingest.FIRED_WINDOW + 10] == 0.0


def test_calcium_target_delta_is_signed(tmp_path):
    rows = {i: [(0, 0, 0.3, 0.5, 1.0, 1.0, 0, 0)] for i in range(10)}
    root = write_raw_layout(tmp_path, "learning", rows, networks={0: []})
    layout = ingest.RawDatasetLayout.discover(root)
    (frame,) = ingest.transpose_scenario(layout, "learning")
    assert frame.columns["calcium_target_delta"][0] == np.float32(0.3) - np.float32(0.5)


def test_missing_network_file_marks_frame_and_warns(tmp_path, caplog):
    rows = {i: [(0, 0, 0.5, 0.5, 1.0, 1.0, 0, 0), (1, 0, 0.5, 0.5, 1.0, 1.0, 0, 0)] for i in range(10)}
    root = write_raw_layout(tmp_path, "learning", rows, networks={0: [(1, 2, 0.5)]})
    layout = ingest.RawDatasetLayout.discover(root)
    with caplog.at_level(logging.WARNING, logger="plastiscope.ingest"):
        frames = list(ingest.transpose_scenario(layout, "learning"))
    assert not frames[0].connectivity_missing
    assert frames[0].connectivity.total == 1
    assert frames[1].connectivity_missing
    assert frames[1].connectivity.total == 0
    assert any("network file missing" in r.message for r in caplog.records)


def test_monitor_timestep_disagreement_names_neuron(tmp_path):
    rows = {i: [(0, 0, 0.5, 0.5, 1.0, 1.0, 0, 0), (1, 0, 0.5, 0.5, 1.0, 1.0, 0, 0)] for i in range(10)}
    rows[7] = [(0, 0, 0.5, 0.5, 1.0, 1.0, 0, 0), (2, 0, 0.5, 0.5, 1.0, 1.0, 0, 0)]
    root = write_raw_layout(tmp_path, "learning", rows, networks={})
    layout = ingest.RawDatasetLayout.discover(root)
    with pytest.raises(ValidationError, match="neuron 7"):
        list(ingest.transpose_scenario(layout, "learning"))


def test_monitor_shorter_file_names_neuron(tmp_path):
    rows = {i: [(0, 0, 0.5, 0.5, 1.0, 1.0, 0, 0), (1, 0, 0.5, 0.5, 1.0, 1.0, 0, 0)] for i in range(10)}
    rows[3] = rows[3][:1]
    root = write_raw_layout(tmp_path, "learning", rows, networks={})
    layout = ingest.RawDatasetLayout.discover(root)
    with pytest.raises(ValidationError, match="neuron 3"):
        list(ingest.transpose_scenario(layout, "learning"))


def test_malformed_trailing_line_is_hard_error(tmp_path):
    rows = {i: [(0, 0, 0.5, 0.5, 1.0, 1.0, 0, 0)] for i in range(10)}
    root = write_raw_layout(tmp_path, "learning", rows, networks={})
    monitor = root / "learning" / "neurons" / "4.csv"
    with open(monitor, "a", encoding="utf-8") as fh:
        fh.write("1;0;0.5")  # truncated row, no newline
    layout = ingest.RawDatasetLayout.discover(root)
    with pytest.raises(FormatError, match="malformed"):
        list(ingest.transpose_scenario(layout, "learning"))


def test_bad_monitor_header_rejected(tmp_path):
    rows = {i: [(0, 0, 0.5, 0.5, 1.0, 1.0, 0, 0)] for i in range(10)}
    root = write_raw_layout(tmp_path, "learning", rows, networks={})
    monitor = root / "learning" / "neurons" / "0.csv"
    text = monitor.read_text().splitlines()
    text[0] = "step,fired,calcium"
    monitor.write_text("\n".join(text) + "\n")
    layout = ingest.RawDatasetLayout.discover(root)
    with pytest.raises(FormatError, match="header"):
        list(ingest.transpose_scenario(layout, "learning"))


def test_crlf_monitor_files_accepted(tmp_path):
    rows = {i: [(0, 1, 0.5, 0.5, 1.0, 1.0, 2, 3)] for i in range(10)}
    root = write_raw_layout(tmp_path, "learning", rows, networks={0: []})
    for i in range(10):
        monitor = root / "learning" / "neurons" / f"{i}.csv"
        monitor.write_bytes(monitor.read_bytes().replace(b"\n", b"\r\n"))
    layout = ingest.RawDatasetLayout.discover(root)
    (frame,) = ingest.transpose_scenario(layout, "learning")
    assert frame.columns["synapses_out"][5] == 3


def test_chunk_size_does_not_change_output(tiny_raw, tiny_statics):
    small = list(ingest.transpose_scenario(tiny_raw, "injury", tiny_statics, chunk_steps=2))
    large = list(ingest.transpose_scenario(tiny_raw, "injury", tiny_statics, chunk_steps=64))
    assert len(small) == len(large)
    for a, b in zip(small, large):
        assert frames_equal(a, b)


def test_round_trip_matches_raw_monitor_values(tiny_raw, tiny_statics):
    """Direct columns must equal the raw text values bit-exactly."""
    frames = list(ingest.transpose_scenario(tiny_raw, "calcium_targets", tiny_statics))
    monitor = tiny_raw.scenario_dirs["calcium_targets"] / "neurons" / "17.csv"
    lines = monitor.read_text().splitlines()[1:]
    for frame, line in zip(frames, lines):
        step, fired, calcium, target, axons, dendrites, syn_in, syn_out = line.split(";")
        assert frame.timestep == int(step)
        assert frame.columns["fired"][17] == int(fired)
        assert frame.columns["calcium"][17] == np.float32(float(calcium))
        assert frame.columns["calcium_target_delta"][17] == np.float32(float(calcium)) - np.float32(float(target))
        assert frame.columns["grown_axons"][17] == np.float32(float(axons))
        assert frame.columns["grown_dendrites"][17] == np.float32(float(dendrites))
        assert frame.columns["synapses_in"][17] == int(syn_in)
        assert frame.columns["synapses_out"][17] == int(syn_out)


def test_synapse_columns_match_network_file_counts(tiny_raw, tiny_statics):
    """Generator consistency: per-neuron counts equal a brute-force recount."""
    frames = list(ingest.transpose_scenario(tiny_raw, "learning", tiny_statics))
    n = len(tiny_statics)
    for frame in frames[:2]:
        path = tiny_raw.scenario_dirs["learning"] / "network" / f"step_{frame.timestep}.txt"
        syn_in = np.zeros(n, dtype=np.uint32)
        syn_out = np.zeros(n, dtype=np.uint32)
        for line in path.read_text().splitlines():
            tgt, src, _ = line.split()
            syn_in[int(tgt)] += 1
            syn_out[int(src)] += 1
        assert np.array_equal(frame.columns["synapses_in"], syn_in)
        assert np.array_equal(frame.columns["synapses_out"], syn_out)


def test_unknown_scenario_rejected(tiny_raw):
    with pytest.raises(ValidationError, match="unknown scenario"):
        list(ingest.transpose_scenario(tiny_raw, "dreaming"))
