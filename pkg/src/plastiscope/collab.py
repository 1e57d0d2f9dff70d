"""Collaboration sessions: a versioned shared view state replicated to every
member of a session over WebSocket JSON messages.

The server applies updates in arrival order (last-writer-wins), bumps the
version by exactly one per applied update, and broadcasts ``state{path,
value, version}`` to every member including the sender. Clients fold those
broadcasts with the same pure :func:`apply_update` the server uses, so all
replicas converge byte-identically (canonical JSON).
"""

from __future__ import annotations

import asyncio
import copy
import json
import logging
import math
import secrets
import string
import time
from dataclasses import dataclass, field
from typing import Any

from fastapi import WebSocket, WebSocketDisconnect

from .model import NeuronProperty, ScenarioCatalog

logger = logging.getLogger(__name__)

SESSION_ID_ALPHABET = string.ascii_uppercase + string.digits
SESSION_ID_LENGTH = 6

MAX_VIEWS = 8
VISIBILITY_MODES = ("neurons", "connections", "both")
DISPLAY_MODES = ("dynamic_radius", "displaced")
RANGE_MODES = ("global", "local")
COLOR_PROPERTIES = tuple(p.value for p in NeuronProperty)

ORIENTATION_TOLERANCE = 1e-6

DEFAULT_HEARTBEAT_INTERVAL = 15.0
DEFAULT_HEARTBEAT_MISSES = 2
DEFAULT_SESSION_LINGER = 60.0


class UpdateError(Exception):
    """An update was rejected; ``code`` is ``bad_path`` or ``bad_value``."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


def canonical_json(value: Any) -> str:
    """Canonical serialization used to compare replicated states."""
    return json.dumps(value, sort_keys=True, separators=(",", ":"))


def default_camera() -> dict:
    return {
        "position": [0.0, 0.0, 250.0],
        "orientation": [0.0, 0.0, 0.0, 1.0],
        "target": [0.0, 0.0, 0.0],
    }


def _default_scenario(catalog: ScenarioCatalog | None) -> tuple[str, int]:
    scenario = "learning"
    if catalog is not None and scenario not in catalog.scenario_ids:
        scenario = catalog.scenario_ids[0] if catalog.scenario_ids else "learning"
    timestep = 0
    if catalog is not None:
        steps = catalog.timesteps.get(scenario) or [0]
        if timestep not in steps:
            timestep = steps[0]
    return scenario, timestep


def default_view(catalog: ScenarioCatalog | None = None) -> dict:
    scenario, timestep = _default_scenario(catalog)
    return {
        "scenario_id": scenario,
        "timestep": timestep,
        "visibility": "both",
        "display_mode": "dynamic_radius",
        "color_property": "calcium",
        "range_mode": "global",
        "diff": None,
        "near_clip": 0.1,
        "camera": default_camera(),
    }


def default_session_state(catalog: ScenarioCatalog | None = None) -> dict:
    return {
        "view_count": 1,
        "views": [default_view(catalog)],
        "sync_cameras": False,
        "chart_source_view": 0,
    }


def _require_int(value: Any, what: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise UpdateError("bad_value", f"{what} must be an integer")
    return value


def _require_bool(value: Any, what: str) -> bool:
    if not isinstance(value, bool):
        raise UpdateError("bad_value", f"{what} must be a boolean")
    return value


def _require_number(value: Any, what: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise UpdateError("bad_value", f"{what} must be a number")
    if not math.isfinite(value):
        raise UpdateError("bad_value", f"{what} must be finite")
    return value


def _require_choice(value: Any, choices: tuple[str, ...], what: str) -> str:
    if value not in choices:
        raise UpdateError("bad_value", f"{what} must be one of {list(choices)}")
    return value


def _validate_vector(value: Any, length: int, what: str) -> list[float]:
    if not isinstance(value, list) or len(value) != length:
        raise UpdateError("bad_value", f"{what} must be a list of {length} numbers")
    return [_require_number(v, what) for v in value]


def _validate_camera(value: Any) -> dict:
    if not isinstance(value, dict) or set(value) != {"position", "orientation", "target"}:
        raise UpdateError(
            "bad_value", "camera must have exactly position, orientation, and target"
        )
    position = _validate_vector(value["position"], 3, "camera.position")
    orientation = _validate_vector(value["orientation"], 4, "camera.orientation")
    target = _validate_vector(value["target"], 3, "camera.target")
    norm = math.sqrt(sum(v * v for v in orientation))
    if abs(norm - 1.0) > ORIENTATION_TOLERANCE:
        raise UpdateError("bad_value", f"camera.orientation must be unit length, |q|={norm}")
    return {"position": position, "orientation": orientation, "target": target}


def _validate_coordinate(
    scenario_id: Any, timestep: Any, catalog: ScenarioCatalog | None, what: str
) -> tuple[str, int]:
    if not isinstance(scenario_id, str):
        raise UpdateError("bad_value", f"{what} scenario_id must be a string")
    timestep = _require_int(timestep, f"{what} timestep")
    if timestep < 0:
        raise UpdateError("bad_value", f"{what} timestep must be >= 0")
    if catalog is not None:
        if scenario_id not in catalog.scenario_ids:
            raise UpdateError("bad_value", f"unknown scenario {scenario_id!r}")
        if timestep not in catalog.timesteps[scenario_id]:
            raise UpdateError(
                "bad_value", f"timestep {timestep} not recorded for scenario {scenario_id!r}"
            )
    return scenario_id, timestep


def _clamp_timestep(timestep: int, scenario_id: str, catalog: ScenarioCatalog | None) -> int:
    """Largest recorded step <= the current one, else the first recorded step."""
    if catalog is None or scenario_id not in catalog.timesteps:
        return timestep
    steps = catalog.timesteps[scenario_id]
    if not steps or timestep in steps:
        return timestep
    earlier = [t for t in steps if t <= timestep]
    return max(earlier) if earlier else steps[0]


def apply_update(
    state: dict, path: str, value: Any, catalog: ScenarioCatalog | None = None
) -> dict:
    """Pure fold of one update into a session state; returns the new state.

    Shared by the server (authoritative apply) and clients (folding
    broadcasts), so every replica implements identical semantics, including
    the camera fan-out while ``sync_cameras`` is on.
    """
    new = copy.deepcopy(state)
    parts = path.split(".")

    if parts == ["view_count"]:
        count = _require_int(value, "view_count")
        if not 1 <= count <= MAX_VIEWS:
            raise UpdateError("bad_value", f"view_count must be 1..{MAX_VIEWS}")
        views = new["views"]
        while len(views) < count:
            views.append(copy.deepcopy(views[-1]))
        del views[count:]
        new["view_count"] = count
        new["chart_source_view"] = min(new["chart_source_view"], count - 1)
        return new

    if parts == ["sync_cameras"]:
        flag = _require_bool(value, "sync_cameras")
        new["sync_cameras"] = flag
        if flag:
            for view in new["views"]:
                view["camera"] = copy.deepcopy(new["views"][0]["camera"])
        return new

    if parts == ["chart_source_view"]:
        index = _require_int(value, "chart_source_view")
        if not 0 <= index < new["view_count"]:
            raise UpdateError("bad_value", f"chart_source_view must be < {new['view_count']}")
        new["chart_source_view"] = index
        return new

    if len(parts) == 3 and parts[0] == "views":
        try:
            index = int(parts[1])
        except ValueError:
            raise UpdateError("bad_path", f"bad view index {parts[1]!r}") from None
        if not 0 <= index < new["view_count"]:
            raise UpdateError("bad_path", f"view index {index} out of range")
        view = new["views"][index]
        field_name = parts[2]

        if field_name == "scenario_id":
            if not isinstance(value, str):
                raise UpdateError("bad_value", "scenario_id must be a string")
            if catalog is not None and value not in catalog.scenario_ids:
                raise UpdateError("bad_value", f"unknown scenario {value!r}")
            view["scenario_id"] = value
            view["timestep"] = _clamp_timestep(view["timestep"], value, catalog)
            return new
        if field_name == "timestep":
            _, timestep = _validate_coordinate(view["scenario_id"], value, catalog, "view")
            view["timestep"] = timestep
            return new
        if field_name == "visibility":
            view["visibility"] = _require_choice(value, VISIBILITY_MODES, "visibility")
            return new
        if field_name == "display_mode":
            view["display_mode"] = _require_choice(value, DISPLAY_MODES, "display_mode")
            return new
        if field_name == "color_property":
            view["color_property"] = _require_choice(value, COLOR_PROPERTIES, "color_property")
            return new
        if field_name == "range_mode":
            view["range_mode"] = _require_choice(value, RANGE_MODES, "range_mode")
            return new
        if field_name == "diff":
            if value is None:
                view["diff"] = None
                return new
            if not isinstance(value, dict) or set(value) != {"scenario_id", "timestep"}:
                raise UpdateError(
                    "bad_value", "diff must be null or {scenario_id, timestep}"
                )
            scenario_id, timestep = _validate_coordinate(
                value["scenario_id"], value["timestep"], catalog, "diff"
            )
            view["diff"] = {"scenario_id": scenario_id, "timestep": timestep}
            return new
        if field_name == "near_clip":
            clip = _require_number(value, "near_clip")
            if clip < 0:
                raise UpdateError("bad_value", "near_clip must be >= 0")
            view["near_clip"] = clip
            return new
        if field_name == "camera":
            camera = _validate_camera(value)
            if new["sync_cameras"]:
                for v in new["views"]:
                    v["camera"] = copy.deepcopy(camera)
            else:
                view["camera"] = camera
            return new
        raise UpdateError("bad_path", f"unknown view field {field_name!r}")

    raise UpdateError("bad_path", f"unknown path {path!r}")


# ---------------------------------------------------------------------------
# Server
# ---------------------------------------------------------------------------


@dataclass
class _Connection:
    socket: WebSocket
    session: "Session | None" = None
    last_pong: float = field(default_factory=time.monotonic)
    send_lock: asyncio.Lock = field(default_factory=asyncio.Lock)

    async def send(self, message: dict) -> None:
        async with self.send_lock:
            await self.socket.send_text(json.dumps(message, separators=(",", ":")))


class Session:
    def __init__(self, session_id: str, state: dict):
        self.session_id = session_id
        self.state = state
        self.version = 0
        self.members: list[_Connection] = []
        self.lock = asyncio.Lock()
        self.empty_since: float | None = time.monotonic()

    @property
    def member_count(self) -> int:
        return len(self.members)


class CollabServer:
    """Session registry plus the WebSocket protocol loop.

    Distinct sessions are fully independent; within a session every update
    is applied under one lock, so members observe a single total order.
    """

    def __init__(
        self,
        catalog: ScenarioCatalog | None = None,
        heartbeat_interval: float = DEFAULT_HEARTBEAT_INTERVAL,
        heartbeat_misses: int = DEFAULT_HEARTBEAT_MISSES,
        session_linger: float = DEFAULT_SESSION_LINGER,
    ):
        self.catalog = catalog
        self.heartbeat_interval = heartbeat_interval
        self.heartbeat_misses = heartbeat_misses
        self.session_linger = session_linger
        self.sessions: dict[str, Session] = {}

    # -- session lifecycle

    def _new_session_id(self) -> str:
        while True:
            session_id = "".join(
                secrets.choice(SESSION_ID_ALPHABET) for _ in range(SESSION_ID_LENGTH)
            )
            if session_id not in self.sessions:
                return session_id

    def sweep(self, now: float | None = None) -> None:
        """Destroy sessions that have been empty longer than the linger."""
        now = time.monotonic() if now is None else now
        expired = [
            sid
            for sid, session in self.sessions.items()
            if session.empty_since is not None
            and now - session.empty_since >= self.session_linger
        ]
        for sid in expired:
            del self.sessions[sid]
            logger.info("session %s expired", sid)

    def _live_session(self, session_id: str) -> Session | None:
        self.sweep()
        return self.sessions.get(session_id)

    def create_session(self) -> Session:
        self.sweep()
        session = Session(self._new_session_id(), default_session_state(self.catalog))
        self.sessions[session.session_id] = session
        logger.info("session %s created", session.session_id)
        return session

    async def close_all(self) -> None:
        """Shutdown: detach every member and drop all sessions."""
        for session in list(self.sessions.values()):
            for conn in list(session.members):
                conn.session = None
                try:
                    await conn.socket.close(code=1001)
                except Exception:  # already gone
                    pass
            session.members.clear()
        self.sessions.clear()

    # -- membership

    def _join(self, conn: _Connection, session: Session) -> None:
        self._detach(conn)
        session.members.append(conn)
        session.empty_since = None
        conn.session = session

    def _detach(self, conn: _Connection) -> None:
        session = conn.session
        if session is None:
            return
        if conn in session.members:
            session.members.remove(conn)
        if not session.members:
            session.empty_since = time.monotonic()
        conn.session = None

    # -- protocol

    async def handle_socket(self, socket: WebSocket) -> None:
        await socket.accept()
        conn = _Connection(socket)
        heartbeat = asyncio.create_task(self._heartbeat(conn))
        try:
            while True:
                try:
                    raw = await socket.receive_text()
                except WebSocketDisconnect:
                    break
                try:
                    message = json.loads(raw)
                except json.JSONDecodeError:
                    await conn.send(
                        {"type": "error", "code": "bad_message", "message": "not valid JSON"}
                    )
                    continue
                if not isinstance(message, dict) or not isinstance(message.get("type"), str):
                    await conn.send(
                        {"type": "error", "code": "bad_message", "message": "missing type"}
                    )
                    continue
                if not await self._dispatch(conn, message):
                    break
        finally:
            heartbeat.cancel()
            self._detach(conn)

    async def _dispatch(self, conn: _Connection, message: dict) -> bool:
        """Handle one message; returns False when the connection should end."""
        kind = message["type"]
        if kind == "create_session":
            session = self.create_session()
            self._join(conn, session)
            await conn.send(
                {
                    "type": "session_created",
                    "session_id": session.session_id,
                    "version": session.version,
                }
            )
            await conn.send(
                {"type": "snapshot", "state": session.state, "version": session.version}
            )
        elif kind == "join":
            session_id = message.get("session_id")
            session = self._live_session(session_id) if isinstance(session_id, str) else None
            if session is None:
                await conn.send(
                    {
                        "type": "error",
                        "code": "no_such_session",
                        "message": f"no session {session_id!r}",
                    }
                )
                return True
            self._join(conn, session)
            await conn.send(
                {"type": "snapshot", "state": session.state, "version": session.version}
            )
        elif kind == "update":
            await self._apply_update(conn, message)
        elif kind == "leave":
            self._detach(conn)
        elif kind == "pong":
            conn.last_pong = time.monotonic()
        elif kind == "ping":
            await conn.send({"type": "pong"})
        else:
            await conn.send(
                {"type": "error", "code": "bad_message", "message": f"unknown type {kind!r}"}
            )
        return True

    async def _apply_update(self, conn: _Connection, message: dict) -> None:
        session = conn.session
        if session is None:
            await conn.send(
                {"type": "error", "code": "not_in_session", "message": "join a session first"}
            )
            return
        path = message.get("path")
        if not isinstance(path, str) or "value" not in message:
            await conn.send(
                {"type": "error", "code": "bad_message", "message": "update needs path and value"}
            )
            return
        value = message["value"]
        async with session.lock:
            try:
                session.state = apply_update(session.state, path, value, self.catalog)
            except UpdateError as exc:
                await conn.send({"type": "error", "code": exc.code, "message": str(exc)})
                return
            session.version += 1
            broadcast = {
                "type": "state",
                "path": path,
                "value": value,
                "version": session.version,
            }
            dead = []
            for member in session.members:
                try:
                    await member.send(broadcast)
                except Exception:
                    dead.append(member)
            for member in dead:
                self._detach(member)

    async def _heartbeat(self, conn: _Connection) -> None:
        try:
            while True:
                await asyncio.sleep(self.heartbeat_interval)
                if (
                    time.monotonic() - conn.last_pong
                    >= self.heartbeat_interval * self.heartbeat_misses
                ):
                    self._detach(conn)
                    await conn.socket.close(code=1001)
                    return
                await conn.send({"type": "ping"})
        except asyncio.CancelledError:
            raise
        except Exception:
            self._detach(conn)
