"""Session service: one scene per connection over a line-based JSON
protocol, plus a small HTTP server for saving and loading scenes by id.

Transports:

* TCP, newline-delimited JSON messages (the reference transport);
* WebSocket upgrade on the HTTP port at /session, one JSON message per
  text frame, for browser clients that cannot open raw sockets.

Both speak exactly the same message schema, version "skelforge-proto/1".
"""
from __future__ import annotations

import base64
import hashlib
import json
import logging
import os
import re
import socket
import socketserver
import struct
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Optional, Tuple

from . import errors
from .geom import Point
from .refine import Scope, ScopeLevel
from .scene import Scene, SceneConfig, Transform
from .stroke import RawStroke, SimplePolygon

log = logging.getLogger(__name__)

PROTOCOL_VERSION = "skelforge-proto/1"
_WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"
_NAME_RE = re.compile(r"^[A-Za-z0-9_-]{1,64}$")


def data_directory(override: Optional[str] = None) -> Path:
    path = override or os.environ.get("SKELFORGE_DATA_DIR") or "skelforge_data"
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p


class Session:
    """Message dispatcher owning one scene; calls are serialized by caller."""

    def __init__(self, data_dir: Path):
        self.scene = Scene()
        self.data_dir = data_dir

    def handle_line(self, line: str) -> str:
        try:
            msg = json.loads(line)
        except json.JSONDecodeError as ex:
            return json.dumps(_error_reply(None, "MalformedDocument", str(ex)))
        return json.dumps(self.handle(msg))

    def handle(self, msg: dict) -> dict:
        req_id = msg.get("id")
        t0 = time.perf_counter_ns()
        try:
            kind = msg.get("kind")
            handler = getattr(self, f"_on_{_snake(kind)}", None)
            if handler is None:
                raise ValueError(f"unknown message kind {kind!r}")
            delta = handler(msg)
        except errors.SkelforgeError as ex:
            return _error_reply(req_id, type(ex).__name__, str(ex))
        except (KeyError, TypeError, ValueError) as ex:
            return _error_reply(req_id, "BadRequest", str(ex))
        timing = dict(self.scene.last_timings)
        timing["t_total"] = (time.perf_counter_ns() - t0) // 1000
        return {
            "proto": PROTOCOL_VERSION,
            "id": req_id,
            "status": "OK",
            "delta": delta,
            "timing_us": timing,
        }

    # ------------------------------------------------------------- handlers

    def _on_create_part(self, msg: dict) -> dict:
        transform = _transform_from(msg.get("transform"))
        if "stroke" in msg:
            stroke = msg["stroke"]
            raw = RawStroke([Point(x, y) for x, y in stroke["points"]],
                            bool(stroke.get("closed", True)))
            pid = self.scene.add_part(raw, transform)
        else:
            poly = SimplePolygon([Point(x, y) for x, y in msg["polygon"]])
            pid = self.scene.add_part_from_polygon(poly, transform)
        return self._delta(parts=[pid], created=pid)

    def _on_move_part(self, msg: dict) -> dict:
        pid = int(msg["part"])
        self.scene.move_part(pid, _transform_from(msg["transform"]))
        return self._delta(parts=[pid])

    def _on_set_config(self, msg: dict) -> dict:
        cfg = {k: float(v) for k, v in msg["config"].items()}
        unknown = set(cfg) - set(SceneConfig().to_json())
        if unknown:
            raise ValueError(f"unknown config keys {sorted(unknown)}")
        self.scene.set_config(**cfg)
        return self._delta()

    def _on_set_scope(self, msg: dict) -> dict:
        scope = msg["scope"]
        level = ScopeLevel(scope["level"])
        target = scope.get("target")
        self.scene.set_scope(Scope(level, None if target is None else int(target)))
        return self._delta()

    def _on_get_scene(self, msg: dict) -> dict:
        return self._delta(parts=sorted(self.scene.parts), document=True)

    def _on_save_scene(self, msg: dict) -> dict:
        name = _safe_name(msg["name"])
        payload = self.scene.save()
        (self.data_dir / f"{name}.json").write_bytes(payload)
        out = self._delta()
        out["saved"] = name
        return out

    def _on_load_scene(self, msg: dict) -> dict:
        name = _safe_name(msg["name"])
        path = self.data_dir / f"{name}.json"
        if not path.exists():
            raise errors.UnknownPart(f"no saved scene {name!r}")
        self.scene = Scene.load(path.read_bytes())
        return self._delta(parts=sorted(self.scene.parts), document=True)

    # ----------------------------------------------------------------- view

    def _delta(self, parts=(), created: Optional[int] = None,
               document: bool = False) -> dict:
        scene = self.scene
        g = scene.global_skeleton()
        delta: dict = {
            "parts": [_part_payload(scene.parts[p]) for p in parts
                      if p in scene.parts],
            "hierarchy": [
                {"parent": e.parent, "child": e.child,
                 "attach": _attach_payload(e), "child_joint": e.child_joint}
                for e in (scene.hierarchy[c] for c in sorted(scene.hierarchy))
            ],
            "global_skeleton": g.to_json(),
            "counts": {"joints": len(g.joints), "bones": g.n_bones(),
                       "parts": len(scene.parts)},
            "config": scene.config.to_json(),
            "scope": {"level": scene.scope.level.value,
                      "target": scene.scope.target},
        }
        if created is not None:
            delta["created"] = created
        if document:
            delta["document"] = scene.to_json()
        return delta


def _part_payload(part) -> dict:
    wp = part.world_polygon()
    return {
        "id": part.id,
        "seq": part.seq,
        "transform": {"tx": part.transform.tx, "ty": part.transform.ty,
                      "rot": part.transform.rot, "scale": part.transform.scale},
        "polygon": [[v.x, v.y] for v in part.polygon.vertices],
        "world_polygon": [[v.x, v.y] for v in wp.vertices],
        "skeleton": part.skeleton.to_json(),
        "world_skeleton": part.world_skeleton().to_json(),
        "sskel_debug": [
            [t.apply(Point(x1, y1)).x, t.apply(Point(x1, y1)).y,
             t.apply(Point(x2, y2)).x, t.apply(Point(x2, y2)).y]
            for (x1, y1, x2, y2) in part.debug_sskel
            for t in (part.transform,)
        ],
    }


def _attach_payload(e) -> dict:
    out = {"type": e.kind}
    if e.bone is not None:
        out["bone"] = list(e.bone)
    if e.point is not None:
        out["point"] = [e.point.x, e.point.y]
    if e.joint is not None:
        out["joint"] = e.joint
    return out


def _error_reply(req_id, code: str, message: str) -> dict:
    return {"proto": PROTOCOL_VERSION, "id": req_id, "status": "ERROR",
            "error": {"code": code, "message": message}}


def _snake(kind: Optional[str]) -> str:
    if not kind:
        return "missing"
    return re.sub(r"(?<!^)(?=[A-Z])", "_", kind).lower()


def _transform_from(data: Optional[dict]) -> Transform:
    if not data:
        return Transform()
    return Transform(float(data.get("tx", 0.0)), float(data.get("ty", 0.0)),
                     float(data.get("rot", 0.0)), float(data.get("scale", 1.0)))


def _safe_name(name: str) -> str:
    if not _NAME_RE.match(name or ""):
        raise ValueError("scene name must match [A-Za-z0-9_-]{1,64}")
    return name


# ------------------------------------------------------------ TCP transport

class _LineHandler(socketserver.StreamRequestHandler):
    def handle(self) -> None:
        session = Session(self.server.data_dir)  # type: ignore[attr-defined]
        for raw in self.rfile:
            line = raw.decode("utf-8", "replace").strip()
            if not line:
                continue
            reply = session.handle_line(line)
            try:
                self.wfile.write(reply.encode() + b"\n")
                self.wfile.flush()
            except (BrokenPipeError, ConnectionResetError):
                return


class _TCPServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True


# ----------------------------------------------------------- HTTP transport

class _HTTPHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"

    def log_message(self, fmt, *args):  # quiet by default
        log.debug("http: " + fmt, *args)

    def _scene_path(self) -> Optional[Path]:
        m = re.match(r"^/scenes/([A-Za-z0-9_-]{1,64})$", self.path)
        if not m:
            return None
        return self.server.data_dir / f"{m.group(1)}.json"  # type: ignore

    def do_GET(self) -> None:
        if self.path == "/session" and "upgrade" in self.headers.get(
                "Connection", "").lower():
            self._websocket_session()
            return
        path = self._scene_path()
        if path is None:
            self._respond(404, b'{"error":"not found"}')
        elif not path.exists():
            self._respond(404, b'{"error":"no such scene"}')
        else:
            self._respond(200, path.read_bytes())

    def do_PUT(self) -> None:
        path = self._scene_path()
        if path is None:
            self._respond(404, b'{"error":"not found"}')
            return
        length = int(self.headers.get("Content-Length", 0))
        body = self.rfile.read(length)
        try:
            Scene.load(body)  # validate before storing
        except errors.SkelforgeError as ex:
            self._respond(400, json.dumps(
                {"error": type(ex).__name__, "message": str(ex)}).encode())
            return
        path.write_bytes(body)
        self._respond(200, b'{"status":"OK"}')

    def _respond(self, status: int, body: bytes) -> None:
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    # ------------------------------------------------------------ websocket

    def _websocket_session(self) -> None:
        key = self.headers.get("Sec-WebSocket-Key")
        if not key:
            self._respond(400, b'{"error":"missing websocket key"}')
            return
        accept = base64.b64encode(
            hashlib.sha1((key + _WS_GUID).encode()).digest()).decode()
        self.send_response(101, "Switching Protocols")
        self.send_header("Upgrade", "websocket")
        self.send_header("Connection", "Upgrade")
        self.send_header("Sec-WebSocket-Accept", accept)
        self.end_headers()
        self.close_connection = True
        conn = self.connection
        session = Session(self.server.data_dir)  # type: ignore[attr-defined]
        try:
            while True:
                frame = _ws_read_frame(conn)
                if frame is None:
                    return
                opcode, payload = frame
                if opcode == 0x8:  # close
                    conn.sendall(_ws_frame(0x8, b""))
                    return
                if opcode == 0x9:  # ping
                    conn.sendall(_ws_frame(0xA, payload))
                    continue
                if opcode != 0x1:
                    continue
                reply = session.handle_line(payload.decode("utf-8", "replace"))
                conn.sendall(_ws_frame(0x1, reply.encode()))
        except (ConnectionResetError, BrokenPipeError, socket.timeout):
            return


def _ws_read_frame(conn: socket.socket) -> Optional[Tuple[int, bytes]]:
    head = _read_exact(conn, 2)
    if head is None:
        return None
    opcode = head[0] & 0x0F
    masked = bool(head[1] & 0x80)
    length = head[1] & 0x7F
    if length == 126:
        ext = _read_exact(conn, 2)
        if ext is None:
            return None
        length = struct.unpack(">H", ext)[0]
    elif length == 127:
        ext = _read_exact(conn, 8)
        if ext is None:
            return None
        length = struct.unpack(">Q", ext)[0]
    mask = b"\x00" * 4
    if masked:
        mask_data = _read_exact(conn, 4)
        if mask_data is None:
            return None
        mask = mask_data
    payload = _read_exact(conn, length) if length else b""
    if payload is None:
        return None
    if masked:
        payload = bytes(b ^ mask[i % 4] for i, b in enumerate(payload))
    return opcode, payload


def _ws_frame(opcode: int, payload: bytes) -> bytes:
    head = bytes([0x80 | opcode])
    n = len(payload)
    if n < 126:
        head += bytes([n])
    elif n < 1 << 16:
        head += bytes([126]) + struct.pack(">H", n)
    else:
        head += bytes([127]) + struct.pack(">Q", n)
    return head + payload


def _read_exact(conn: socket.socket, n: int) -> Optional[bytes]:
    buf = b""
    while len(buf) < n:
        chunk = conn.recv(n - len(buf))
        if not chunk:
            return None
        buf += chunk
    return buf


# ------------------------------------------------------------------ service

class ServiceHandle:
    """Running servers plus their worker threads; stop() shuts both down."""

    def __init__(self, tcp: _TCPServer, http: ThreadingHTTPServer):
        self.tcp = tcp
        self.http = http
        self.tcp_port = tcp.server_address[1]
        self.http_port = http.server_address[1]
        self._threads = [
            threading.Thread(target=tcp.serve_forever, daemon=True),
            threading.Thread(target=http.serve_forever, daemon=True),
        ]
        for t in self._threads:
            t.start()

    def stop(self) -> None:
        self.tcp.shutdown()
        self.http.shutdown()
        self.tcp.server_close()
        self.http.server_close()


def serve(port: int = 7341, data_dir: Optional[str] = None,
          http_port: Optional[int] = None, host: str = "127.0.0.1") -> ServiceHandle:
    """Start the TCP session service and the HTTP save/load endpoint.

    Port 0 picks free ports (used by tests); the HTTP port defaults to
    port + 1 when a fixed TCP port is given.
    """
    directory = data_directory(data_dir)
    tcp = _TCPServer((host, port), _LineHandler)
    tcp.data_dir = directory  # type: ignore[attr-defined]
    hp = http_port if http_port is not None else (0 if port == 0 else port + 1)
    http = ThreadingHTTPServer((host, hp), _HTTPHandler)
    http.data_dir = directory  # type: ignore[attr-defined]
    http.daemon_threads = True
    return ServiceHandle(tcp, http)
