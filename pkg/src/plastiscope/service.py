"""Read-only HTTP service over an immutable store snapshot.

Catalog and statistics travel as JSON; frames, diffs, and static geometry
travel as the binary payloads from :mod:`plastiscope.payload` (JSON columns
would roughly triple transfer size). Transport compression is plain
content-encoding negotiation and never affects payload correctness. Every
2xx body is deterministic given the store contents.

Error bodies share one schema: ``{"error": <code>, "message": <text>}``.
"""

from __future__ import annotations

import asyncio
import hashlib
import threading
from collections import OrderedDict
from contextlib import asynccontextmanager
from pathlib import Path

from fastapi import FastAPI, Response, WebSocket
from fastapi.exceptions import RequestValidationError
from fastapi.responses import HTMLResponse, JSONResponse
from fastapi.staticfiles import StaticFiles
from starlette.exceptions import HTTPException as StarletteHTTPException
from starlette.middleware.gzip import GZipMiddleware

from . import aggregate, payload, stats, store
from .collab import CollabServer
from .model import (
    FrameNotFoundError,
    NeuronProperty,
    PropertyRange,
    TimestepFrame,
    property_column,
)

#: Parallel-coordinates rows are capped here and subsampled by stride.
PARALLEL_COORDS_CAP = 10_000

_FRAME_CACHE_SIZE = 16

_STATUS_CODES = {
    400: "bad_request",
    404: "not_found",
    405: "method_not_allowed",
    503: "store_unavailable",
}


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


class StoreView:
    """Immutable store snapshot with a small decoded-frame cache."""

    def __init__(self, root: Path | str):
        self.root = Path(root)
        self.catalog = store.read_catalog(self.root)
        self.statics = store.read_positions(self.root)
        self.positions_payload = payload.encode_positions(self.statics)
        self.positions_etag = '"' + hashlib.sha256(self.positions_payload).hexdigest()[:32] + '"'
        self._cache: OrderedDict[tuple[str, int], TimestepFrame] = OrderedDict()
        self._cache_lock = threading.Lock()

    def frame(self, scenario_id: str, timestep: int) -> TimestepFrame:
        if not self.catalog.has_frame(scenario_id, timestep):
            raise FrameNotFoundError(f"no frame for ({scenario_id}, {timestep})")
        key = (scenario_id, timestep)
        with self._cache_lock:
            if key in self._cache:
                self._cache.move_to_end(key)
                return self._cache[key]
        frame = store.read_frame(store.FrameLocator.for_frame(self.root, scenario_id, timestep))
        with self._cache_lock:
            self._cache[key] = frame
            while len(self._cache) > _FRAME_CACHE_SIZE:
                self._cache.popitem(last=False)
        return frame


def _parse_int(text: str, status: int, what: str) -> int:
    try:
        return int(text)
    except (TypeError, ValueError):
        raise ApiError(status, _STATUS_CODES[status], f"{what} must be an integer, got {text!r}") from None


def create_app(
    store_root: Path | str | None = None,
    client_dir: Path | str | None = None,
    *,
    heartbeat_interval: float = 15.0,
    heartbeat_misses: int = 2,
    session_linger: float = 60.0,
) -> FastAPI:
    """Build the combined data + collaboration app for one store root."""
    view: StoreView | None = None
    load_error = "no store configured"
    if store_root is not None:
        try:
            view = StoreView(store_root)
        except Exception as exc:
            load_error = f"store at {store_root} not usable: {exc}"

    collab_server = CollabServer(
        catalog=view.catalog if view is not None else None,
        heartbeat_interval=heartbeat_interval,
        heartbeat_misses=heartbeat_misses,
        session_linger=session_linger,
    )

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        async def sweeper():
            while True:
                await asyncio.sleep(max(session_linger / 2.0, 0.05))
                collab_server.sweep()

        task = asyncio.create_task(sweeper())
        try:
            yield
        finally:
            task.cancel()
            await collab_server.close_all()

    app = FastAPI(title="plastiscope", lifespan=lifespan)
    app.add_middleware(GZipMiddleware, minimum_size=512)
    app.state.store_view = view
    app.state.collab = collab_server

    def _store() -> StoreView:
        if view is None:
            raise ApiError(503, "store_unavailable", load_error)
        return view

    @app.exception_handler(ApiError)
    async def _api_error(_, exc: ApiError):
        return JSONResponse(status_code=exc.status, content={"error": exc.code, "message": exc.message})

    @app.exception_handler(StarletteHTTPException)
    async def _http_error(_, exc: StarletteHTTPException):
        code = _STATUS_CODES.get(exc.status_code, "error")
        return JSONResponse(status_code=exc.status_code, content={"error": code, "message": str(exc.detail)})

    @app.exception_handler(RequestValidationError)
    async def _validation_error(_, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": "bad_request", "message": str(exc)})

    @app.get("/api/catalog")
    def get_catalog():
        return _store().catalog.to_json_dict()

    @app.get("/api/positions")
    def get_positions():
        sv = _store()
        return Response(
            content=sv.positions_payload,
            media_type="application/octet-stream",
            headers={
                "Cache-Control": "public, max-age=31536000, immutable",
                "ETag": sv.positions_etag,
            },
        )

    def _lookup_frame(sv: StoreView, scenario_id: str, timestep: int) -> TimestepFrame:
        try:
            return sv.frame(scenario_id, timestep)
        except FrameNotFoundError as exc:
            raise ApiError(404, "not_found", str(exc)) from None

    @app.get("/api/frame/{scenario_id}/{timestep}")
    def get_frame(scenario_id: str, timestep: str):
        sv = _store()
        t = _parse_int(timestep, 404, "timestep")
        frame = _lookup_frame(sv, scenario_id, t)
        return Response(content=payload.encode_frame(frame), media_type="application/octet-stream")

    @app.get("/api/diff")
    def get_diff(
        baseScenario: str | None = None,
        baseT: str | None = None,
        otherScenario: str | None = None,
        otherT: str | None = None,
    ):
        sv = _store()
        if None in (baseScenario, baseT, otherScenario, otherT):
            raise ApiError(
                400, "bad_request", "diff needs baseScenario, baseT, otherScenario, otherT"
            )
        base = _lookup_frame(sv, baseScenario, _parse_int(baseT, 404, "baseT"))
        other = _lookup_frame(sv, otherScenario, _parse_int(otherT, 404, "otherT"))
        diff = aggregate.diff_frames(base, other)
        return Response(content=payload.encode_diff(diff), media_type="application/octet-stream")

    def _resolve_range(
        sv: StoreView, frame: TimestepFrame, prop: str, range_mode: str
    ) -> PropertyRange:
        if prop == NeuronProperty.AREA.value:
            if range_mode == "global":
                return PropertyRange(0.0, float(max(sv.statics.area_count - 1, 0)))
            ids = sv.statics.area_ids
            return PropertyRange(float(ids.min()), float(ids.max()))
        if range_mode == "global":
            scenario_ranges = sv.catalog.global_ranges.get(frame.scenario_id, {})
            if prop in scenario_ranges:
                return scenario_ranges[prop]
        return aggregate.local_range(frame, prop)

    @app.get("/api/stats/{scenario_id}/{timestep}/{prop}")
    def get_stats(
        scenario_id: str,
        timestep: str,
        prop: str,
        rangeMode: str = "global",
        bins: str = str(stats.DEFAULT_BIN_COUNT),
    ):
        sv = _store()
        if prop not in {p.value for p in NeuronProperty}:
            raise ApiError(400, "bad_request", f"unknown property {prop!r}")
        if rangeMode not in ("global", "local"):
            raise ApiError(400, "bad_request", f"rangeMode must be global or local, got {rangeMode!r}")
        bin_count = _parse_int(bins, 400, "bins")
        if bin_count < 1:
            raise ApiError(400, "bad_request", f"bins must be >= 1, got {bin_count}")
        t = _parse_int(timestep, 404, "timestep")
        frame = _lookup_frame(sv, scenario_id, t)

        value_range = _resolve_range(sv, frame, prop, rangeMode)
        column = property_column(frame, prop, sv.statics)
        histogram = stats.histogram(column, value_range, bin_count, property_name=prop)
        boxes = stats.box_stats_by_area(frame, prop, sv.statics)
        coords = stats.parallel_coords(frame, sv.statics, PARALLEL_COORDS_CAP)
        box_docs = []
        for box in boxes:
            doc = box.to_json_dict()
            doc["area_name"] = sv.catalog.area_table[box.area_id]
            box_docs.append(doc)
        return {
            "scenario_id": scenario_id,
            "timestep": t,
            "property": prop,
            "range_mode": rangeMode,
            "range": {"min": value_range.min, "max": value_range.max},
            "histogram": histogram.to_json_dict(),
            "box_stats": box_docs,
            "parallel_coords": coords.to_json_dict(),
        }

    @app.websocket("/ws")
    async def websocket_endpoint(socket: WebSocket):
        await collab_server.handle_socket(socket)

    if client_dir is not None:
        app.mount("/", StaticFiles(directory=str(client_dir), html=True), name="client")
    else:

        @app.get("/", response_class=HTMLResponse)
        def index():
            return (
                "<!doctype html><title>plastiscope</title>"
                "<h1>plastiscope data service</h1>"
                "<p>No client bundle configured. API lives under <code>/api</code>, "
                "collaboration sessions under <code>/ws</code>.</p>"
            )

    return app
