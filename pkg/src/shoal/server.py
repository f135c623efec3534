"""HTTP and WebSocket front end over the session manager.

Lifecycle: ``POST /sessions`` creates a session, ``GET /sessions/{id}/
snapshot`` returns the latest snapshot, ``POST /sessions/{id}/commands``
applies one canonical command, and ``/sessions/{id}/stream`` pushes event
messages. Each session's commands and iterations run serially on the
event loop; a start command spawns one paced driver task per session.
"""

from __future__ import annotations

import asyncio
import json
import logging
from contextlib import asynccontextmanager
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Request, WebSocket, WebSocketDisconnect
from fastapi.responses import Response

from . import wire
from .config import ConfigError
from .session import CommandError, SessionManager

__all__ = ["create_app"]

log = logging.getLogger(__name__)

DEFAULT_PACE = 0.05


def _json_response(document: dict, status_code: int = 200) -> Response:
    return Response(content=json.dumps(document, separators=(",", ":"), allow_nan=False),
                    status_code=status_code, media_type="application/json")


def _error_response(code: str, message: str, status_code: int) -> Response:
    return _json_response(wire.document(wire.ErrorMsg(code=code, message=message)), status_code)


def create_app(manager: Optional[SessionManager] = None, pace: float = DEFAULT_PACE,
               config_root: Optional[str] = None, log_dir: Optional[str] = None) -> FastAPI:
    """Build the service; ``config_root`` anchors relative dispatcher paths
    and ``log_dir`` receives per-session command logs on shutdown."""
    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        for task in list(app.state.drivers.values()):
            task.cancel()
        _flush_logs(app)

    app = FastAPI(title="shoal control service", lifespan=lifespan)
    app.state.manager = manager if manager is not None else SessionManager()
    app.state.drivers = {}

    def _flush_logs(app: FastAPI) -> None:
        if not log_dir:
            return
        target = Path(log_dir)
        target.mkdir(parents=True, exist_ok=True)
        for session_id, session in app.state.manager.sessions.items():
            path = target / f"{session_id}-commands.jsonl"
            with path.open("w", encoding="utf-8") as handle:
                for entry in session.command_log:
                    handle.write(json.dumps(entry, separators=(",", ":")) + "\n")
            log.info("flushed %d commands for session %s to %s",
                     len(session.command_log), session_id, path)

    def _resolve_paths(document: dict) -> dict:
        if config_root and isinstance(document.get("dispatcher"), dict):
            section = dict(document["dispatcher"])
            for key in ("fields_root", "items_root"):
                value = section.get(key)
                if isinstance(value, str) and not Path(value).is_absolute():
                    section[key] = str(Path(config_root) / value)
            document = dict(document)
            document["dispatcher"] = section
        return document

    async def _drive(session_id: str) -> None:
        session = app.state.manager.sessions[session_id]
        try:
            while session.running and not session.finished:
                session.step(1)
                await asyncio.sleep(pace)
        except Exception as exc:  # surfaced to subscribers, never crashes the app
            log.exception("session %s run loop failed", session_id)
            session.running = False
            session._publish(wire.ErrorMsg(code="internal", message=str(exc)))
        finally:
            app.state.drivers.pop(session_id, None)

    def _ensure_driver(session_id: str) -> None:
        session = app.state.manager.sessions.get(session_id)
        if session is None or not session.running:
            return
        task = app.state.drivers.get(session_id)
        if task is None or task.done():
            app.state.drivers[session_id] = asyncio.get_event_loop().create_task(_drive(session_id))

    @app.post("/sessions")
    async def create_session(request: Request):
        try:
            body = json.loads(await request.body() or b"{}")
        except json.JSONDecodeError as exc:
            return _error_response("parse", f"invalid JSON: {exc.msg}", 400)
        if not isinstance(body, dict) or body.get("v") != wire.WIRE_VERSION:
            return _error_response("schema", "body must be an object with v=1", 400)
        document = body.get("config")
        if not isinstance(document, dict):
            return _error_response("schema", "config: required object field", 400)
        seed = body.get("seed")
        if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int)):
            return _error_response("schema", "seed: expected an integer", 400)
        try:
            session_id = app.state.manager.create_session(_resolve_paths(document), seed)
        except ConfigError as exc:
            return _error_response("validation", str(exc), 400)
        return _json_response({"v": wire.WIRE_VERSION, "session_id": session_id}, 201)

    @app.get("/sessions/{session_id}/snapshot")
    async def get_snapshot(session_id: str):
        try:
            session = app.state.manager.get(session_id)
        except CommandError as exc:
            return _error_response(exc.code, str(exc), 404)
        return _json_response(session.snapshot())

    @app.post("/sessions/{session_id}/commands")
    async def post_command(session_id: str, request: Request):
        raw = (await request.body()).decode("utf-8")
        try:
            command = wire.deserialize(raw)
        except wire.WireError as exc:
            return _error_response("schema", str(exc), 400)
        if not isinstance(command, wire.COMMAND_TYPES):
            return _error_response("schema", "message is not a command", 400)
        try:
            ack = app.state.manager.apply_command(session_id, command)
        except CommandError as exc:
            status = 404 if exc.code in ("unknown_session", "unknown_fish") else 400
            return _error_response(exc.code, str(exc), status)
        except (ConfigError, ValueError) as exc:
            return _error_response("validation", str(exc), 400)
        _ensure_driver(session_id)
        return _json_response(ack)

    @app.websocket("/sessions/{session_id}/stream")
    async def stream(websocket: WebSocket, session_id: str):
        try:
            session = app.state.manager.get(session_id)
        except CommandError:
            await websocket.close(code=4004)
            return
        await websocket.accept()
        subscription = session.subscribe()

        async def forward():
            while True:
                event = await subscription.next()
                await websocket.send_text(wire.serialize(event))

        async def listen():
            # Inbound frames are ignored; receive() raising is how an idle
            # handler learns the client went away.
            while True:
                await websocket.receive_text()

        tasks = {asyncio.ensure_future(forward()), asyncio.ensure_future(listen())}
        try:
            _, pending = await asyncio.wait(tasks, return_when=asyncio.FIRST_COMPLETED)
            for task in pending:
                task.cancel()
        finally:
            for task in tasks:
                task.cancel()
                try:
                    await task
                except (WebSocketDisconnect, RuntimeError, asyncio.CancelledError):
                    pass
            session.unsubscribe(subscription)

    return app
