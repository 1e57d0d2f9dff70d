import pytest

from plastiscope import ingest
from plastiscope.cli import run_preprocess


@pytest.fixture(scope="session")
def tiny_raw(tmp_path_factory):
    """3 clusters x 2 areas x 5 steps, all four scenarios."""
    root = tmp_path_factory.mktemp("tiny") / "raw"
    return ingest.generate_synthetic(root, n_clusters=3, n_areas=2, n_timesteps=5, seed=7)


@pytest.fixture(scope="session")
def tiny_statics(tiny_raw):
    return ingest.parse_positions(tiny_raw.positions_path)


@pytest.fixture(scope="session")
def small_store(tmp_path_factory):
    """20 clusters x 4 areas x 12 steps, preprocessed; injury hits at t=6."""
    base = tmp_path_factory.mktemp("small")
    layout = ingest.generate_synthetic(base / "raw", n_clusters=20, n_areas=4, n_timesteps=12, seed=11)
    store_root = base / "store"
    run_preprocess(layout.root, store_root, jobs=1)
    return store_root


@pytest.fixture(scope="session")
def small_raw(small_store):
    return small_store.parent / "raw"
