"""Small shared HTTP plumbing for the adapter and aggregator services."""

from __future__ import annotations

import json
import logging
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

log = logging.getLogger(__name__)


class ApiHandler(BaseHTTPRequestHandler):
    """Request handler with JSON/bytes helpers; subclasses implement
    handle_get(path) / handle_post(path, body)."""

    protocol_version = "HTTP/1.1"
    server_version = "appds"

    def log_message(self, fmt, *args):  # route to logging instead of stderr
        log.debug("%s %s", self.address_string(), fmt % args)

    def send_json(self, obj, status: int = 200) -> None:
        self.send_raw(json.dumps(obj).encode(), "application/json", status)

    def send_raw(self, data: bytes, content_type: str, status: int = 200) -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def send_error_json(self, status: int, message: str) -> None:
        self.send_json({"error": message}, status)

    def do_GET(self):
        try:
            self.handle_get(self.path)
        except (BrokenPipeError, ConnectionResetError):
            pass
        except Exception as e:  # a handler bug must not kill the connection thread
            log.exception("unhandled error serving GET %s", self.path)
            try:
                self.send_error_json(500, f"internal error: {e}")
            except Exception:
                pass

    def do_POST(self):
        try:
            length = int(self.headers.get("Content-Length", "0"))
            body = self.rfile.read(length) if length else b""
            self.handle_post(self.path, body)
        except (BrokenPipeError, ConnectionResetError):
            pass
        except Exception as e:
            log.exception("unhandled error serving POST %s", self.path)
            try:
                self.send_error_json(500, f"internal error: {e}")
            except Exception:
                pass

    def handle_get(self, path: str) -> None:
        self.send_error_json(404, "not found")

    def handle_post(self, path: str, body: bytes) -> None:
        self.send_error_json(404, "not found")


class HttpService:
    """A ThreadingHTTPServer wrapper that runs in a background thread."""

    def __init__(self, handler_cls, host: str = "127.0.0.1", port: int = 0) -> None:
        self.server = ThreadingHTTPServer((host, port), handler_cls)
        self.server.daemon_threads = True
        self._thread: threading.Thread | None = None

    @property
    def host(self) -> str:
        return self.server.server_address[0]

    @property
    def port(self) -> int:
        return self.server.server_address[1]

    @property
    def url(self) -> str:
        return f"http://{self.host}:{self.port}"

    def start(self) -> "HttpService":
        self._thread = threading.Thread(target=self.server.serve_forever, daemon=True)
        self._thread.start()
        return self

    def serve_forever(self) -> None:
        self.server.serve_forever()

    def stop(self) -> None:
        self.server.shutdown()
        self.server.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)
            self._thread = None
