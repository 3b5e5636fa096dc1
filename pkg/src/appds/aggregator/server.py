"""HTTP front of the aggregation service.

    POST /api/v1/queries                                -> 201 {collection_id, manifest_url}
    GET  /api/v1/collections/{id}                       -> manifest JSON
    GET  /api/v1/collections/{id}/files/{source}/{path} -> octet-stream
    GET  /api/v1/sources                                -> sources + ingest/cache stats
    GET  /api/v1/health                                 -> {"status": "ok"}
    GET  /ui/...                                        -> static web interface (optional)
"""

from __future__ import annotations

import json
import mimetypes
import re
from pathlib import Path
from urllib.parse import unquote

from ..catalogue import InvalidQuery
from ..httpd import ApiHandler, HttpService
from .canon import parse_query_json
from .core import AdapterUnreachable, Aggregator, UnknownCollection, UnknownPath

_COLLECTION_RE = re.compile(r"^/api/v1/collections/([0-9a-f]{64})$")
_COLLECTION_FILE_RE = re.compile(r"^/api/v1/collections/([0-9a-f]{64})/files/(.+)$")


class AggregatorServer(HttpService):
    def __init__(self, aggregator: Aggregator, host: str = "127.0.0.1",
                 port: int = 0, ui_dir: str | Path | None = None) -> None:
        agg = aggregator
        ui_root = Path(ui_dir).resolve() if ui_dir else None

        class Handler(ApiHandler):
            def handle_post(self, path: str, body: bytes) -> None:
                if path != "/api/v1/queries":
                    self.send_error_json(404, "not found")
                    return
                try:
                    obj = json.loads(body)
                except ValueError as e:
                    self.send_error_json(400, f"body is not valid JSON: {e}")
                    return
                try:
                    q = parse_query_json(obj)
                    manifest = agg.handle_query(q)
                except InvalidQuery as e:
                    self.send_error_json(400, str(e))
                    return
                self.send_json({
                    "collection_id": manifest.collection_id,
                    "manifest_url": f"/api/v1/collections/{manifest.collection_id}",
                }, status=201)

            def handle_get(self, path: str) -> None:
                path = unquote(path)
                if path == "/api/v1/health":
                    self.send_json({"status": "ok"})
                    return
                if path == "/api/v1/sources":
                    self.send_json(agg.sources_stats())
                    return
                m = _COLLECTION_RE.match(path)
                if m:
                    try:
                        manifest = agg.get_collection(m.group(1))
                    except UnknownCollection as e:
                        self.send_error_json(404, str(e))
                        return
                    self.send_json(manifest.to_public_json())
                    return
                m = _COLLECTION_FILE_RE.match(path)
                if m:
                    try:
                        data = agg.get_collection_file(m.group(1), m.group(2))
                    except (UnknownCollection, UnknownPath) as e:
                        self.send_error_json(404, str(e))
                        return
                    except AdapterUnreachable as e:
                        self.send_error_json(502, str(e))
                        return
                    self.send_raw(data, "application/octet-stream")
                    return
                if path == "/ui" or path.startswith("/ui/"):
                    self._serve_ui(path)
                    return
                self.send_error_json(404, "not found")

            def _serve_ui(self, path: str) -> None:
                if ui_root is None:
                    self.send_error_json(404, "no web interface configured (--ui-dir)")
                    return
                rel = path[len("/ui"):].lstrip("/") or "index.html"
                target = (ui_root / rel).resolve()
                if not str(target).startswith(str(ui_root)) or not target.is_file():
                    self.send_error_json(404, "not found")
                    return
                ctype = mimetypes.guess_type(target.name)[0] or "application/octet-stream"
                self.send_raw(target.read_bytes(), ctype)

        super().__init__(Handler, host=host, port=port)
        self.aggregator = aggregator
