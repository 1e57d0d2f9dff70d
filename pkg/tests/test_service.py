import gzip

import numpy as np
import pytest
from fastapi.testclient import TestClient

from plastiscope import aggregate, ingest, payload, service, stats, store
from plastiscope.model import frames_equal, property_column


@pytest.fixture(scope="module")
def app(small_store):
    return service.create_app(small_store)


@pytest.fixture(scope="module")
def client(app):
    with TestClient(app) as tc:
        yield tc


def test_catalog_endpoint_round_trips(client, small_store):
    response = client.get("/api/catalog")
    assert response.status_code == 200
    assert response.json() == store.read_catalog(small_store).to_json_dict()
    assert len(response.json()["scenarios"]) == 4


def test_empty_store_returns_503(tmp_path):
    app = service.create_app(tmp_path / "nothing")
    with TestClient(app) as tc:
        response = tc.get("/api/catalog")
        assert response.status_code == 503
        body = response.json()
        assert set(body) == {"error", "message"}
        assert body["error"] == "store_unavailable"


def test_positions_block(client, small_store, small_raw):
    first = client.get("/api/positions")
    second = client.get("/api/positions")
    assert first.status_code == 200
    assert first.content == second.content  # immutable across requests
    assert "immutable" in first.headers["cache-control"]

    block = payload.decode_positions(first.content)
    statics = ingest.parse_positions(ingest.RawDatasetLayout.discover(small_raw).positions_path)
    assert len(block.neuron_id) == len(statics)
    assert np.array_equal(block.positions, statics.positions)
    assert np.array_equal(block.area_id, statics.area_ids)


def test_frame_payload_decodes_to_stored_frame(client, small_store):
    response = client.get("/api/frame/learning/3")
    assert response.status_code == 200
    decoded = payload.decode_payload(response.content)
    stored = store.read_frame(store.FrameLocator.for_frame(small_store, "learning", 3))
    assert frames_equal(decoded, stored)


def test_unknown_frame_coordinates_404(client):
    for url in ("/api/frame/learning/1000000000", "/api/frame/dreaming/0", "/api/frame/learning/abc"):
        response = client.get(url)
        assert response.status_code == 404
        body = response.json()
        assert body["error"] == "not_found"
        assert "message" in body


def test_unknown_route_shares_error_schema(client):
    response = client.get("/api/everything")
    assert response.status_code == 404
    assert set(response.json()) == {"error", "message"}


def test_diff_of_frame_with_itself_is_zero(client):
    response = client.get(
        "/api/diff",
        params={"baseScenario": "learning", "baseT": 2, "otherScenario": "learning", "otherT": 2},
    )
    assert response.status_code == 200
    diff = payload.decode_payload(response.content)
    assert all(not np.any(c) for c in diff.column_deltas.values())
    assert not np.any(diff.connectivity_delta)


def test_cross_scenario_diff_matches_oracle(client, small_store):
    response = client.get(
        "/api/diff",
        params={
            "baseScenario": "no_connectivity",
            "baseT": 4,
            "otherScenario": "learning",
            "otherT": 4,
        },
    )
    assert response.status_code == 200
    decoded = payload.decode_payload(response.content)
    base = store.read_frame(store.FrameLocator.for_frame(small_store, "no_connectivity", 4))
    other = store.read_frame(store.FrameLocator.for_frame(small_store, "learning", 4))
    oracle = aggregate.diff_frames(base, other)
    for name in oracle.column_deltas:
        assert np.array_equal(decoded.column_deltas[name], oracle.column_deltas[name])
    assert np.array_equal(decoded.connectivity_delta, oracle.connectivity_delta)


def test_injury_diff_changes_connectivity_of_injured_area(client, small_store):
    """The synthetic injury deletes every synapse touching area 0 at t=6."""
    response = client.get(
        "/api/diff",
        params={"baseScenario": "injury", "baseT": 5, "otherScenario": "injury", "otherT": 7},
    )
    diff = payload.decode_payload(response.content)
    before = store.read_frame(store.FrameLocator.for_frame(small_store, "injury", 5))
    touching = int(before.connectivity.counts[0, :].sum() + before.connectivity.counts[:, 0].sum()
                   - before.connectivity.counts[0, 0])
    assert touching > 0
    assert diff.connectivity_delta[0, :].sum() + diff.connectivity_delta[:, 0].sum() < 0
    after = store.read_frame(store.FrameLocator.for_frame(small_store, "injury", 7))
    assert after.connectivity.counts[0, :].sum() == 0
    assert after.connectivity.counts[:, 0].sum() == 0


def test_diff_requires_all_coordinates(client):
    response = client.get("/api/diff", params={"baseScenario": "learning"})
    assert response.status_code == 400
    assert response.json()["error"] == "bad_request"


def test_diff_bad_coordinate_404(client):
    response = client.get(
        "/api/diff",
        params={"baseScenario": "learning", "baseT": 0, "otherScenario": "learning", "otherT": 99},
    )
    assert response.status_code == 404


def test_stats_global_mode_uses_catalog_range(client, small_store):
    response = client.get("/api/stats/learning/3/calcium", params={"rangeMode": "global"})
    assert response.status_code == 200
    body = response.json()
    catalog = store.read_catalog(small_store)
    expected = catalog.global_ranges["learning"]["calcium"]
    assert body["histogram"]["range"] == {"min": expected.min, "max": expected.max}
    assert body["range_mode"] == "global"
    assert sum(body["histogram"]["counts"]) == catalog.neuron_count


def test_stats_matches_direct_library_call(client, small_store):
    response = client.get("/api/stats/injury/7/synapses_in", params={"rangeMode": "local", "bins": 12})
    assert response.status_code == 200
    body = response.json()

    frame = store.read_frame(store.FrameLocator.for_frame(small_store, "injury", 7))
    statics = store.read_positions(small_store)
    value_range = aggregate.local_range(frame, "synapses_in")
    hist = stats.histogram(property_column(frame, "synapses_in", statics), value_range, 12, "synapses_in")
    assert body["histogram"]["counts"] == hist.counts.tolist()
    boxes = stats.box_stats_by_area(frame, "synapses_in", statics)
    assert [b["area_id"] for b in body["box_stats"]] == [b.area_id for b in boxes]
    assert body["box_stats"][0]["median"] == boxes[0].median
    coords = stats.parallel_coords(frame, statics, service.PARALLEL_COORDS_CAP)
    assert body["parallel_coords"]["stride"] == coords.stride
    assert body["parallel_coords"]["rows"] == coords.rows.tolist()
    assert body["parallel_coords"]["axes"] == list(coords.axes)


def test_stats_area_property_supported(client, small_store):
    response = client.get("/api/stats/learning/0/area")
    assert response.status_code == 200
    body = response.json()
    catalog = store.read_catalog(small_store)
    assert body["range"] == {"min": 0.0, "max": float(len(catalog.area_table) - 1)}
    assert len(body["box_stats"]) == len(catalog.area_table)


def test_stats_validation_errors(client):
    assert client.get("/api/stats/learning/0/mood").status_code == 400
    response = client.get("/api/stats/learning/0/calcium", params={"bins": 0})
    assert response.status_code == 400
    assert response.json()["error"] == "bad_request"
    assert client.get("/api/stats/learning/0/calcium", params={"bins": "x"}).status_code == 400
    assert client.get("/api/stats/learning/0/calcium", params={"rangeMode": "weird"}).status_code == 400
    assert client.get("/api/stats/learning/99999/calcium").status_code == 404


def test_responses_are_deterministic(client):
    a = client.get("/api/frame/learning/1")
    b = client.get("/api/frame/learning/1")
    assert a.content == b.content
    sa = client.get("/api/stats/learning/1/calcium")
    sb = client.get("/api/stats/learning/1/calcium")
    assert sa.content == sb.content


def test_gzip_negotiation(client):
    plain = client.get("/api/frame/learning/0", headers={"accept-encoding": "identity"})
    zipped = client.get("/api/frame/learning/0", headers={"accept-encoding": "gzip"})
    assert zipped.headers.get("content-encoding") == "gzip"
    # httpx transparently decompresses; the decoded bytes must match
    assert zipped.content == plain.content
    raw_len = int(zipped.headers.get("content-length", len(zipped.content)))
    assert raw_len < len(plain.content)


def test_landing_page_without_client_bundle(client):
    response = client.get("/")
    assert response.status_code == 200
    assert "plastiscope" in response.text


def test_static_client_bundle_mounted(small_store, tmp_path):
    bundle = tmp_path / "dist"
    bundle.mkdir()
    (bundle / "index.html").write_text("<html><body>viewer</body></html>")
    app = service.create_app(small_store, client_dir=bundle)
    with TestClient(app) as tc:
        assert "viewer" in tc.get("/").text
        assert tc.get("/api/catalog").status_code == 200


def test_frame_latency_desk_scale(client):
    import time

    client.get("/api/frame/learning/2")  # warm the cache path
    t0 = time.perf_counter()
    response = client.get("/api/frame/learning/4")
    elapsed = time.perf_counter() - t0
    assert response.status_code == 200
    assert elapsed < 0.05
