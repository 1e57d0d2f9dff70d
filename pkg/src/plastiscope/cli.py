"""Operator entry points: synthesize fixtures, preprocess raw data, serve.

One binary, subcommand style. Configuration precedence is flags, then
PLASTISCOPE_* environment variables, then defaults. Exit codes: 0 success,
1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import logging
import socket
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import click

from . import ingest, store
from .model import (
    CANONICAL_SCENARIOS,
    COLUMN_ORDER,
    PropertyRange,
    ScenarioCatalog,
    ScenarioInfo,
    ValidationError,
)

logger = logging.getLogger(__name__)


def preprocess_scenario(raw_root: str, scenario_id: str, store_root: str) -> dict:
    """Transpose one scenario into the store; returns its catalog fragment.

    Top-level so --jobs can fan scenarios out to worker processes.
    """
    layout = ingest.RawDatasetLayout.discover(raw_root)
    statics = ingest.parse_positions(layout.positions_path)
    timesteps: list[int] = []
    ranges: dict[str, tuple[float, float]] = {}
    bytes_out = 0
    for frame in ingest.transpose_scenario(layout, scenario_id, statics):
        locator = store.write_frame(frame, store_root)
        bytes_out += store.frame_size_on_disk(locator)
        timesteps.append(frame.timestep)
        for name in COLUMN_ORDER:
            column = frame.columns[name]
            lo, hi = float(column.min()), float(column.max())
            if name in ranges:
                lo, hi = min(lo, ranges[name][0]), max(hi, ranges[name][1])
            ranges[name] = (lo, hi)
    if not timesteps:
        raise ValidationError(f"scenario {scenario_id} produced no frames")
    return {
        "scenario_id": scenario_id,
        "timesteps": timesteps,
        "ranges": ranges,
        "bytes_out": bytes_out,
    }


def run_preprocess(
    raw_root: Path | str,
    store_root: Path | str,
    scenarios: list[str] | None = None,
    jobs: int = 1,
) -> dict:
    """Populate a store from a raw layout and write its catalog."""
    layout = ingest.RawDatasetLayout.discover(raw_root)
    available = layout.scenario_ids()
    selected = available if scenarios is None else scenarios
    unknown = set(selected) - set(available)
    if unknown:
        raise ValidationError(f"scenarios not present in raw data: {sorted(unknown)}")

    statics = ingest.parse_positions(layout.positions_path)
    store.write_positions(statics, store_root)

    args = [(str(raw_root), scenario_id, str(store_root)) for scenario_id in selected]
    if jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(preprocess_scenario, *zip(*args)))
    else:
        results = [preprocess_scenario(*a) for a in args]

    results.sort(key=lambda r: ingest.scenario_sort_key(r["scenario_id"]))
    catalog = ScenarioCatalog(
        scenarios=[
            ScenarioInfo(
                r["scenario_id"],
                CANONICAL_SCENARIOS.get(r["scenario_id"], r["scenario_id"].replace("_", " ").title()),
            )
            for r in results
        ],
        timesteps={r["scenario_id"]: r["timesteps"] for r in results},
        neuron_count=len(statics),
        area_table=statics.area_names,
        global_ranges={
            r["scenario_id"]: {
                name: PropertyRange(lo, hi) for name, (lo, hi) in r["ranges"].items()
            }
            for r in results
        },
    )
    store.write_catalog(catalog, store_root)

    bytes_in = layout.positions_path.stat().st_size
    for scenario_id in selected:
        for path in layout.scenario_dirs[scenario_id].rglob("*"):
            if path.is_file():
                bytes_in += path.stat().st_size
    bytes_out = sum(r["bytes_out"] for r in results)
    bytes_out += (Path(store_root) / store.CATALOG_FILENAME).stat().st_size
    bytes_out += (Path(store_root) / store.POSITIONS_FILENAME).stat().st_size
    return {
        "scenarios": [r["scenario_id"] for r in results],
        "frames_written": sum(len(r["timesteps"]) for r in results),
        "bytes_in": bytes_in,
        "bytes_out": bytes_out,
    }


@click.group()
def main() -> None:
    """Preprocess, inspect, and serve brain-plasticity simulation ensembles."""
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s %(message)s",
    )


@main.command()
@click.option("--clusters", default=500, show_default=True, type=int, help="Neuron clusters (10 neurons each).")
@click.option("--areas", default=8, show_default=True, type=int, help="Brain areas.")
@click.option("--timesteps", default=100, show_default=True, type=int, help="Recorded timesteps.")
@click.option("--seed", default=42, show_default=True, type=int, help="Generator seed.")
@click.option("--output", required=True, type=click.Path(path_type=Path), help="Target directory.")
def synth(clusters: int, areas: int, timesteps: int, seed: int, output: Path) -> None:
    """Write a deterministic synthetic raw dataset."""
    try:
        layout = ingest.generate_synthetic(output, clusters, areas, timesteps, seed)
    except ValidationError as exc:
        raise click.UsageError(str(exc)) from exc
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    click.echo(
        f"wrote {clusters * 10} neurons x {timesteps} steps for "
        f"{len(layout.scenario_dirs)} scenarios under {layout.root}"
    )


@main.command()
@click.option("--input", "raw_root", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--output", "store_root", required=True, type=click.Path(path_type=Path))
@click.option("--scenarios", default=None, help="Comma-separated scenario subset.")
@click.option("--jobs", default=1, show_default=True, type=int, help="Parallel scenario workers.")
def preprocess(raw_root: Path, store_root: Path, scenarios: str | None, jobs: int) -> None:
    """Transpose a raw per-neuron dataset into a per-timestep columnar store."""
    selected = [s.strip() for s in scenarios.split(",") if s.strip()] if scenarios else None
    if jobs < 1:
        raise click.UsageError("--jobs must be >= 1")
    try:
        summary = run_preprocess(raw_root, store_root, selected, jobs)
    except Exception as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    ratio = summary["bytes_out"] / summary["bytes_in"] if summary["bytes_in"] else float("nan")
    click.echo(f"scenarios:        {', '.join(summary['scenarios'])}")
    click.echo(f"frames written:   {summary['frames_written']}")
    click.echo(f"bytes in:         {summary['bytes_in']}")
    click.echo(f"bytes out:        {summary['bytes_out']}")
    click.echo(f"compression:      {ratio:.3f} (out/in)")


@main.command()
@click.option("--store", "store_root", envvar="PLASTISCOPE_STORE", required=True, type=click.Path(path_type=Path))
@click.option("--port", envvar="PLASTISCOPE_PORT", default=8000, show_default=True, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--client", "client_dir", default=None, type=click.Path(exists=True, path_type=Path), help="Static client bundle directory.")
def serve(store_root: Path, port: int, host: str, client_dir: Path | None) -> None:
    """Serve the data API and collaboration sessions on one port."""
    import uvicorn

    from . import service

    try:
        store.read_catalog(store_root)
    except Exception as exc:
        click.echo(f"error: store is not servable: {exc}", err=True)
        sys.exit(1)
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.bind((host, port))
    except OSError as exc:
        click.echo(f"error: cannot bind {host}:{port}: {exc}", err=True)
        sys.exit(1)
    finally:
        probe.close()

    app = service.create_app(store_root, client_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")


if __name__ == "__main__":
    main()
