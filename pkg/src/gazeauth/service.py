"""Local session service: enrollment and live authentication over a message
protocol.

Two transports carry the same JSON payloads: newline-delimited JSON over a
plain TCP connection (the scripting/test surface), and WebSocket frames for
the browser companion, whose static assets the WebSocket listener can also
serve. One protocol state machine runs per connection; the engine's shared
state is safe across connections.

Client messages: hello, enroll{user, triple}, session_start{user, algorithm},
gaze_point{nonce, t, x, y}, frame_end{nonce}. Server messages: hello{catalog},
enroll_ok, frame_begin{nonce, frame_index, frame_duration_ms,
catalog_version}, frame_ack{frame_index}, auth_result{granted}, error{code,
message}. The server never reveals per-frame classifications: after each
frame_end only frame_ack (and the next frame_begin or the final auth_result)
is sent.
"""

from __future__ import annotations

import asyncio
import http
import json
import logging
from pathlib import Path
from typing import Optional

from .auth import AuthEngine, AuthSession
from .catalog import Catalog, catalog_to_doc
from .errors import GazeAuthError, LockedOut, UnknownUser
from .geometry import RawTrace

log = logging.getLogger(__name__)

DEFAULT_PORT = 7411
PROTOCOL_VERSION = 1
POINT_GRACE_MS = 250.0
MAX_LINE_BYTES = 1 << 20


class SessionHandler:
    """Transport-agnostic protocol state machine for one connection."""

    def __init__(self, engine: AuthEngine, catalog: Catalog):
        self.engine = engine
        self.catalog = catalog
        self.session: Optional[AuthSession] = None
        self.points: list[tuple[float, float, float]] = []

    # Every entry point returns a list of reply messages.

    def handle_raw(self, raw: str | bytes) -> list[dict]:
        try:
            msg = json.loads(raw)
        except (ValueError, UnicodeDecodeError):
            return [_error("parse_error", "message is not valid JSON")]
        return self.handle(msg)

    def handle(self, msg) -> list[dict]:
        if not isinstance(msg, dict) or not isinstance(msg.get("type"), str):
            return [_error("bad_message", "expected an object with a 'type' field")]
        handler = getattr(self, f"_on_{msg['type']}", None)
        if handler is None:
            return [_error("unknown_type", f"unknown message type {msg['type']!r}")]
        try:
            return handler(msg)
        except GazeAuthError as exc:
            return [_error("engine_error", str(exc))]
        except Exception:
            log.exception("internal error handling %s", msg.get("type"))
            return [_error("internal", "internal error")]

    def on_disconnect(self) -> None:
        if self.session is not None and not self.session.decided:
            self.engine.abandon(self.session)
        self.session = None
        self.points = []

    # -- message handlers ---------------------------------------------

    def _on_hello(self, msg) -> list[dict]:
        return [{
            "type": "hello",
            "protocol": PROTOCOL_VERSION,
            "catalog": catalog_to_doc(self.catalog),
        }]

    def _on_enroll(self, msg) -> list[dict]:
        if self.session is not None and not self.session.decided:
            return [_error("session_active", "cannot enroll during a session")]
        user = msg.get("user")
        triple = msg.get("triple")
        if not isinstance(user, str) or not user:
            return [_error("bad_enroll", "'user' must be a non-empty string")]
        if not isinstance(triple, list) or len(triple) != 3:
            return [_error("bad_enroll", "'triple' must list exactly 3 shape ids")]
        try:
            self.engine.enroll(user, triple, msg.get("algorithm", "template"))
        except ValueError as exc:
            return [_error("bad_enroll", str(exc))]
        return [{"type": "enroll_ok", "user": user}]

    def _on_session_start(self, msg) -> list[dict]:
        if self.session is not None and not self.session.decided:
            self.engine.abandon(self.session)
            self.session = None
            self.points = []
            return [_error("session_active", "previous session aborted; start again")]
        user = msg.get("user")
        if not isinstance(user, str) or not user:
            return [_error("bad_session", "'user' must be a non-empty string")]
        algorithm = msg.get("algorithm")
        if algorithm not in (None, "template", "dtree"):
            return [_error("bad_session", f"unknown algorithm {algorithm!r}")]
        try:
            session = self.engine.begin_session(user, algorithm)
        except UnknownUser as exc:
            return [_error("unknown_user", str(exc))]
        except LockedOut as exc:
            return [_error("locked_out", str(exc))]
        self.session = session
        self.points = []
        return [self._frame_begin()]

    def _frame_begin(self) -> dict:
        return {
            "type": "frame_begin",
            "nonce": self.session.nonce,
            "frame_index": self.session.next_frame_index,
            "frame_duration_ms": self.catalog.plan.frame_duration_ms,
            "catalog_version": self.catalog.version,
        }

    def _check_nonce(self, msg) -> Optional[list[dict]]:
        if self.session is None or self.session.decided:
            return [_error("no_session", "no active session")]
        if msg.get("nonce") != self.session.nonce:
            self.engine.abandon(self.session)
            self.session = None
            self.points = []
            return [_error("bad_nonce", "nonce mismatch; session aborted")]
        return None

    def _on_gaze_point(self, msg) -> list[dict]:
        failed = self._check_nonce(msg)
        if failed is not None:
            return failed
        try:
            t = float(msg["t"])
            x = float(msg["x"])
            y = float(msg["y"])
        except (KeyError, TypeError, ValueError):
            return [_error("bad_point", "gaze_point needs numeric t, x, y")]
        # The server owns frame-timing validity; late points are dropped.
        if t <= self.catalog.plan.frame_duration_ms + POINT_GRACE_MS:
            self.points.append((t, x, y))
        return []

    def _on_frame_end(self, msg) -> list[dict]:
        failed = self._check_nonce(msg)
        if failed is not None:
            return failed
        trace = None
        if len(self.points) >= 2:
            ordered = sorted(self.points, key=lambda p: p[0])
            try:
                trace = RawTrace.from_samples(ordered)
            except GazeAuthError:
                trace = None
        self.points = []
        index = self.session.next_frame_index
        self.engine.submit_frame(self.session, trace)
        replies = [{"type": "frame_ack", "frame_index": index}]
        if self.session.decided:
            replies.append({
                "type": "auth_result",
                "granted": self.engine.decide(self.session).granted,
            })
            self.session = None
        else:
            replies.append(self._frame_begin())
        return replies


def _error(code: str, message: str) -> dict:
    return {"type": "error", "code": code, "message": message}


async def _serve_tcp_connection(engine: AuthEngine, catalog: Catalog,
                                reader: asyncio.StreamReader,
                                writer: asyncio.StreamWriter) -> None:
    handler = SessionHandler(engine, catalog)
    try:
        while True:
            try:
                line = await reader.readline()
            except (asyncio.LimitOverrunError, ValueError):
                # Oversized line: the stream is unrecoverable; drop the peer.
                break
            if not line:
                break
            if not line.strip():
                continue
            for reply in handler.handle_raw(line):
                writer.write(json.dumps(reply).encode("utf-8") + b"\n")
            try:
                await writer.drain()
            except ConnectionError:
                break
    except ConnectionError:
        pass
    finally:
        handler.on_disconnect()
        writer.close()
        try:
            await writer.wait_closed()
        except (ConnectionError, OSError):
            pass


_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".mjs": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".json": "application/json",
    ".map": "application/json",
    ".svg": "image/svg+xml",
    ".png": "image/png",
    ".ico": "image/x-icon",
}


def _static_responder(web_root: Optional[Path], catalog: Catalog):
    """HTTP fallback for the WebSocket listener: static assets + /catalog."""

    def respond(connection, request):
        if "Upgrade" in request.headers.get("Connection", "") or \
                request.headers.get("Upgrade", "").lower() == "websocket":
            return None  # continue the WebSocket handshake
        from websockets.datastructures import Headers
        from websockets.http11 import Response

        path = request.path.split("?", 1)[0]
        if path == "/catalog":
            body = json.dumps(catalog_to_doc(catalog)).encode("utf-8")
            return Response(200, "OK", Headers([
                ("Content-Type", "application/json"),
                ("Content-Length", str(len(body))),
            ]), body)
        if web_root is None:
            return connection.respond(http.HTTPStatus.NOT_FOUND, "no web root\n")
        name = path.lstrip("/") or "index.html"
        target = (web_root / name).resolve()
        if not str(target).startswith(str(web_root.resolve())) or not target.is_file():
            return connection.respond(http.HTTPStatus.NOT_FOUND, "not found\n")
        body = target.read_bytes()
        ctype = _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
        return Response(200, "OK", Headers([
            ("Content-Type", ctype),
            ("Content-Length", str(len(body))),
        ]), body)

    return respond


async def serve(engine: AuthEngine, catalog: Catalog, port: int = DEFAULT_PORT,
                host: str = "127.0.0.1", web_port: Optional[int] = None,
                web_root: Optional[Path] = None,
                ready: Optional[asyncio.Event] = None) -> None:
    """Run the TCP protocol server (and optionally the WebSocket/static
    server) until cancelled."""
    tcp_server = await asyncio.start_server(
        lambda r, w: _serve_tcp_connection(engine, catalog, r, w),
        host, port, limit=MAX_LINE_BYTES,
    )
    ws_server = None
    if web_port is not None:
        import websockets.asyncio.server as ws

        async def ws_connection(connection):
            handler = SessionHandler(engine, catalog)
            try:
                async for raw in connection:
                    for reply in handler.handle_raw(raw):
                        await connection.send(json.dumps(reply))
            except Exception:
                pass
            finally:
                handler.on_disconnect()

        ws_server = await ws.serve(
            ws_connection, host, web_port,
            process_request=_static_responder(web_root, catalog),
        )
        log.info("web listener on ws://%s:%d (root %s)", host, web_port, web_root)
    log.info("session service on tcp://%s:%d", host, port)
    if ready is not None:
        ready.set()
    try:
        async with tcp_server:
            await tcp_server.serve_forever()
    finally:
        if ws_server is not None:
            ws_server.close()


def run_service(engine: AuthEngine, catalog: Catalog, port: int = DEFAULT_PORT,
                host: str = "127.0.0.1", web_port: Optional[int] = None,
                web_root: Optional[Path] = None) -> None:
    asyncio.run(serve(engine, catalog, port, host, web_port, web_root))
