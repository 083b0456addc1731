"""HTTP API around sessions: create, wake, query, history, traces.

One SessionState per session id; sessions are isolated and individually
locked so interleaved turns never cross-contaminate histories. Scene input
arrives inline (fixture JSON) or as a ``scene_ref`` name resolved inside the
configured fixture directory.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .backends import BackendSet, build_backend_set
from .capture import InputSnapshot
from .errors import SchemaViolation, SessionPhaseError
from .resolver import ResolverConfig
from .session import WAKE_PHRASE, Session, SessionConfig

_BUNDLED_FIXTURES = Path(__file__).parent / "data" / "fixtures"


@dataclass
class ServiceConfig:
    mode: str = "v1"
    resolver: ResolverConfig = field(default_factory=ResolverConfig)
    fixture_dir: Path = _BUNDLED_FIXTURES
    backends_config: dict = field(default_factory=dict)


class CreateSessionRequest(BaseModel):
    mode: Optional[str] = None


class WakeRequest(BaseModel):
    utterance: str


class QueryRequest(BaseModel):
    text: str
    scene_ref: Optional[str] = None
    scene: Optional[dict] = None
    gaze_px: tuple[float, float]
    point_px: Optional[tuple[float, float]] = None
    mode: Optional[str] = None


class _SessionStore:
    def __init__(self):
        self._sessions: dict[str, Session] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._turns: dict[str, dict] = {}
        self._guard = threading.Lock()

    def add(self, session: Session) -> None:
        with self._guard:
            self._sessions[session.id] = session
            self._locks[session.id] = threading.Lock()

    def get(self, session_id: str) -> tuple[Session, threading.Lock]:
        with self._guard:
            session = self._sessions.get(session_id)
            if session is None:
                raise KeyError(session_id)
            return session, self._locks[session_id]

    def record_turn(self, turn_id: str, trace: dict) -> None:
        with self._guard:
            self._turns[turn_id] = trace

    def trace(self, turn_id: str) -> dict:
        with self._guard:
            return self._turns[turn_id]


def create_app(config: Optional[ServiceConfig] = None, backends: Optional[BackendSet] = None) -> FastAPI:
    """Build the FastAPI app; backends may be injected for tests."""
    config = config or ServiceConfig()
    app = FastAPI(title="deictic", version="0.1.0")
    store = _SessionStore()

    def new_backends() -> BackendSet:
        if backends is not None:
            return backends
        return build_backend_set(config.backends_config)

    def resolve_scene(request: QueryRequest):
        if request.scene is not None:
            return request.scene
        if request.scene_ref is not None:
            name = Path(request.scene_ref).name  # no path traversal
            if not name.endswith(".json"):
                name += ".json"
            path = Path(config.fixture_dir) / name
            if not path.exists():
                raise HTTPException(status_code=404, detail=f"unknown scene_ref {request.scene_ref!r}")
            return path
        return None

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/v1/sessions")
    def create_session(request: Optional[CreateSessionRequest] = None):
        mode = (request.mode if request else None) or config.mode
        session = Session(
            backends=new_backends(),
            config=SessionConfig(resolver=config.resolver, mode=mode),
        )
        store.add(session)
        return {"session_id": session.id, "mode": mode}

    @app.post("/v1/sessions/{session_id}/wake")
    def wake(session_id: str, request: WakeRequest):
        try:
            session, lock = store.get(session_id)
        except KeyError:
            raise HTTPException(status_code=404, detail="unknown session")
        with lock:
            reply = session.wake(request.utterance)
        return {"reply": reply, "phase": session.phase.value}

    @app.post("/v1/sessions/{session_id}/query")
    def query(session_id: str, request: QueryRequest):
        try:
            session, lock = store.get(session_id)
        except KeyError:
            raise HTTPException(status_code=404, detail="unknown session")
        scene = resolve_scene(request)
        snap = InputSnapshot(gaze_px=tuple(request.gaze_px), point_px=request.point_px)
        with lock:
            if request.mode:
                session.config.mode = request.mode
            # One call per turn: wake implicitly when idle.
            if session.phase.value == "idle":
                session.wake(WAKE_PHRASE)
            try:
                result = session.run_turn(request.text, scene, snap)
            except SchemaViolation as exc:
                raise HTTPException(status_code=400, detail=str(exc))
            except SessionPhaseError as exc:
                raise HTTPException(status_code=409, detail=str(exc))
        store.record_turn(result.turn_id, result.trace)
        return result.to_dict()

    @app.get("/v1/sessions/{session_id}/history")
    def history(session_id: str):
        try:
            session, _ = store.get(session_id)
        except KeyError:
            raise HTTPException(status_code=404, detail="unknown session")
        return {"pairs": [{"query": q, "answer": a} for q, a in session.history.pairs]}

    @app.get("/v1/turns/{turn_id}/trace")
    def turn_trace(turn_id: str):
        try:
            return store.trace(turn_id)
        except KeyError:
            raise HTTPException(status_code=404, detail="unknown turn")

    return app
