import signal
import socket
import subprocess
import sys
import time
import urllib.request

import pytest
from click.testing import CliRunner

from plastiscope import store
from plastiscope.cli import main

from .test_ingest import tree_digest


@pytest.fixture
def runner():
    return CliRunner()


def test_synth_writes_layout_and_reports(runner, tmp_path):
    result = runner.invoke(
        main,
        ["synth", "--clusters", "2", "--areas", "2", "--timesteps", "3", "--seed", "1", "--output", str(tmp_path / "raw")],
    )
    assert result.exit_code == 0, result.output
    assert "20 neurons" in result.output
    assert (tmp_path / "raw" / "positions.txt").exists()
    assert (tmp_path / "raw" / "injury" / "neurons" / "0.csv").exists()


def test_synth_is_deterministic_via_cli(runner, tmp_path):
    for name in ("a", "b"):
        result = runner.invoke(
            main,
            ["synth", "--clusters", "1", "--areas", "1", "--timesteps", "2", "--seed", "9", "--output", str(tmp_path / name)],
        )
        assert result.exit_code == 0
    assert tree_digest(tmp_path / "a") == tree_digest(tmp_path / "b")


def test_synth_usage_errors_exit_2(runner, tmp_path):
    result = runner.invoke(main, ["synth", "--clusters", "0", "--output", str(tmp_path)])
    assert result.exit_code == 2
    result = runner.invoke(main, ["synth"])  # missing --output
    assert result.exit_code == 2


def test_preprocess_populates_store_and_prints_summary(runner, tmp_path):
    raw = tmp_path / "raw"
    out = tmp_path / "store"
    assert runner.invoke(main, ["synth", "--clusters", "2", "--areas", "2", "--timesteps", "3", "--seed", "3", "--output", str(raw)]).exit_code == 0
    result = runner.invoke(main, ["preprocess", "--input", str(raw), "--output", str(out)])
    assert result.exit_code == 0, result.output
    assert "frames written:   12" in result.output
    assert "compression:" in result.output
    catalog = store.read_catalog(out)
    assert len(catalog.scenarios) == 4
    assert catalog.timesteps["learning"] == [0, 1, 2]


def test_preprocess_scenario_filter(runner, tmp_path):
    raw = tmp_path / "raw"
    out = tmp_path / "store"
    assert runner.invoke(main, ["synth", "--clusters", "1", "--areas", "1", "--timesteps", "2", "--seed", "5", "--output", str(raw)]).exit_code == 0
    result = runner.invoke(main, ["preprocess", "--input", str(raw), "--output", str(out), "--scenarios", "learning"])
    assert result.exit_code == 0, result.output
    catalog = store.read_catalog(out)
    assert catalog.scenario_ids == ["learning"]
    assert not (out / "injury").exists()


def test_preprocess_unknown_scenario_fails(runner, tmp_path):
    raw = tmp_path / "raw"
    assert runner.invoke(main, ["synth", "--clusters", "1", "--areas", "1", "--timesteps", "1", "--seed", "5", "--output", str(raw)]).exit_code == 0
    result = runner.invoke(main, ["preprocess", "--input", str(raw), "--output", str(tmp_path / "s"), "--scenarios", "dreaming"])
    assert result.exit_code == 1
    assert "dreaming" in result.output


def test_preprocess_jobs_parallel_matches_serial(runner, tmp_path):
    raw = tmp_path / "raw"
    assert runner.invoke(main, ["synth", "--clusters", "2", "--areas", "2", "--timesteps", "3", "--seed", "8", "--output", str(raw)]).exit_code == 0
    assert runner.invoke(main, ["preprocess", "--input", str(raw), "--output", str(tmp_path / "serial")]).exit_code == 0
    assert runner.invoke(main, ["preprocess", "--input", str(raw), "--output", str(tmp_path / "parallel"), "--jobs", "4"]).exit_code == 0
    assert tree_digest(tmp_path / "serial") == tree_digest(tmp_path / "parallel")


def test_serve_without_catalog_exits_1(runner, tmp_path):
    result = runner.invoke(main, ["serve", "--store", str(tmp_path), "--port", "18099"])
    assert result.exit_code == 1
    assert "not servable" in result.output


def test_serve_busy_port_exits_1(runner, small_store):
    blocker = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    blocker.bind(("127.0.0.1", 0))
    port = blocker.getsockname()[1]
    try:
        result = runner.invoke(main, ["serve", "--store", str(small_store), "--port", str(port)])
        assert result.exit_code == 1
        assert "cannot bind" in result.output
    finally:
        blocker.close()


def test_serve_env_var_configuration(runner, tmp_path):
    # PLASTISCOPE_STORE supplies the missing --store flag
    result = runner.invoke(main, ["serve", "--port", "18098"], env={"PLASTISCOPE_STORE": str(tmp_path)})
    assert result.exit_code == 1  # store invalid, but the flag resolved from env
    assert "not servable" in result.output


def _free_port() -> int:
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    probe.bind(("127.0.0.1", 0))
    port = probe.getsockname()[1]
    probe.close()
    return port


def test_serve_end_to_end_and_clean_sigint(small_store):
    port = _free_port()
    proc = subprocess.Popen(
        [sys.executable, "-m", "plastiscope.cli", "serve", "--store", str(small_store), "--port", str(port)],
        stdout=subprocess.PIPE,
        stderr=subprocess.PIPE,
    )
    try:
        deadline = time.time() + 15
        body = None
        while time.time() < deadline:
            try:
                with urllib.request.urlopen(f"http://127.0.0.1:{port}/api/catalog", timeout=1) as response:
                    body = response.read()
                    break
            except Exception:
                if proc.poll() is not None:
                    raise AssertionError(f"server died: {proc.stderr.read().decode()}")
                time.sleep(0.2)
        assert body is not None and b"scenarios" in body
        proc.send_signal(signal.SIGINT)
        assert proc.wait(timeout=15) == 0
    finally:
        if proc.poll() is None:
            proc.kill()
