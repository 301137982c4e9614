"""HTTP transport for serve mode.

Endpoints (frames are normative, the transport is plain JSON-over-HTTP):

    POST /events            one inbound frame  -> {"replies":[frames...]}
    GET  /poll?user_id=U    drain queued pushes -> {"messages":[frames...]}
    GET  /health            liveness probe

With ``--ui-dir`` the handler also serves static files so the browser
client can run same-origin; CORS headers are open regardless.
"""

from __future__ import annotations

import json
import logging
import mimetypes
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from farmchat.errors import FrameError
from farmchat.protocol import message_frame
from farmchat.service import Service

log = logging.getLogger(__name__)

MAX_BODY_BYTES = 1 << 20


class TickLoop(threading.Thread):
    """Drives service.tick() every ``interval`` wall seconds."""

    def __init__(self, service: Service, interval: float):
        super().__init__(daemon=True, name="tick-loop")
        self.service = service
        self.interval = interval
        self._stop = threading.Event()

    def run(self) -> None:
        while not self._stop.wait(self.interval):
            try:
                self.service.tick()
            except Exception:  # noqa: BLE001 - the loop must survive bad ticks
                log.exception("tick failed")

    def stop(self) -> None:
        self._stop.set()


def make_handler(service: Service, ui_dir: Path | None):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):  # route through logging, not stderr
            log.debug("%s %s", self.address_string(), fmt % args)

        def _send(self, status: int, payload: dict | bytes, content_type="application/json"):
            body = (
                payload
                if isinstance(payload, bytes)
                else json.dumps(payload, ensure_ascii=False).encode("utf-8")
            )
            self.send_response(status)
            self.send_header("Content-Type", content_type)
            self.send_header("Content-Length", str(len(body)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.send_header("Access-Control-Allow-Headers", "Content-Type")
            self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
            self.end_headers()
            self.wfile.write(body)

        def do_OPTIONS(self):
            self._send(204, b"", content_type="text/plain")

        def do_POST(self):
            if urlparse(self.path).path != "/events":
                self._send(404, {"error": "not found"})
                return
            length = int(self.headers.get("Content-Length", 0))
            if length <= 0 or length > MAX_BODY_BYTES:
                self._send(400, {"error": "bad content length"})
                return
            raw = self.rfile.read(length)
            try:
                replies = service.handle_raw_frame(raw)
            except FrameError as exc:
                self._send(400, {"error": str(exc), "field": exc.field})
                return
            self._send(200, {"replies": [message_frame(m) for m in replies]})

        def do_GET(self):
            parsed = urlparse(self.path)
            if parsed.path == "/health":
                self._send(200, {"status": "ok"})
                return
            if parsed.path == "/poll":
                query = parse_qs(parsed.query)
                user_ids = query.get("user_id")
                if not user_ids:
                    self._send(400, {"error": "user_id is required"})
                    return
                user_id = user_ids[0]
                try:
                    wait_s = float(query.get("wait", ["0"])[0])
                except ValueError:
                    self._send(400, {"error": "wait must be a number"})
                    return
                deadline = time.monotonic() + min(wait_s, 25.0)
                msgs = service.poll(user_id)
                while not msgs and time.monotonic() < deadline:
                    time.sleep(0.05)
                    msgs = service.poll(user_id)
                self._send(200, {"messages": [message_frame(m) for m in msgs]})
                return
            if ui_dir is not None:
                self._serve_static(parsed.path)
                return
            self._send(404, {"error": "not found"})

        def _serve_static(self, path: str):
            rel = path.lstrip("/") or "index.html"
            candidate = (ui_dir / rel).resolve()
            if not str(candidate).startswith(str(ui_dir.resolve())) or not candidate.is_file():
                self._send(404, {"error": "not found"})
                return
            content_type = mimetypes.guess_type(str(candidate))[0] or "application/octet-stream"
            self._send(200, candidate.read_bytes(), content_type=content_type)

    return Handler


class GatewayServer:
    """ThreadingHTTPServer plus the wall-clock tick loop."""

    def __init__(
        self,
        service: Service,
        host: str = "127.0.0.1",
        port: int = 8080,
        tick_interval: float | None = None,
        ui_dir: str | Path | None = None,
    ):
        self.service = service
        ui_path = Path(ui_dir) if ui_dir else None
        self.httpd = ThreadingHTTPServer((host, port), make_handler(service, ui_path))
        interval = tick_interval if tick_interval is not None else service.config.sim.tick_seconds
        self.tick_loop = TickLoop(service, interval)

    @property
    def port(self) -> int:
        return self.httpd.server_address[1]

    def start(self) -> None:
        self.tick_loop.start()
        thread = threading.Thread(target=self.httpd.serve_forever, daemon=True, name="http")
        thread.start()

    def serve_forever(self) -> None:
        self.tick_loop.start()
        self.httpd.serve_forever()

    def shutdown(self) -> None:
        self.tick_loop.stop()
        self.httpd.shutdown()
        self.httpd.server_close()
        self.service.close()
