"""Read-only HTTP object service in front of a published snapshot."""

from __future__ import annotations

from pathlib import Path

from ..httpd import ApiHandler, HttpService
from .publish import ContentCatalog, ObjectStore, is_object_key, load_published


class AdapterServer(HttpService):
    """Serves a ContentCatalog and its objects; never writes anything.

    Endpoints:
        GET /api/v1/health            -> {"status": "ok"}
        GET /api/v1/catalog           -> catalog JSON (bytes as published)
        GET /api/v1/objects/{64-hex}  -> application/octet-stream
    """

    def __init__(self, catalog: ContentCatalog, store: ObjectStore,
                 host: str = "127.0.0.1", port: int = 0) -> None:
        adapter = self

        class Handler(ApiHandler):
            def handle_get(self, path: str) -> None:
                if path == "/api/v1/health":
                    self.send_json({"status": "ok"})
                elif path == "/api/v1/catalog":
                    self.send_raw(adapter.catalog_bytes(), "application/json")
                elif path.startswith("/api/v1/objects/"):
                    key = path[len("/api/v1/objects/"):]
                    if not is_object_key(key):
                        self.send_error_json(400, f"malformed object hash {key!r}")
                        return
                    data = adapter.object_bytes(key)
                    if data is None:
                        self.send_error_json(404, f"unknown object {key}")
                        return
                    self.send_raw(data, "application/octet-stream")
                else:
                    self.send_error_json(404, "not found")

        super().__init__(Handler, host=host, port=port)
        self.catalog = catalog
        self.store = store
        self._catalog_bytes = catalog.to_json_bytes()

    @classmethod
    def from_published(cls, published_dir: str | Path,
                       host: str = "127.0.0.1", port: int = 0) -> "AdapterServer":
        catalog, store = load_published(published_dir)
        return cls(catalog, store, host=host, port=port)

    def catalog_bytes(self) -> bytes:
        return self._catalog_bytes

    def object_bytes(self, sha256: str) -> bytes | None:
        return self.store.get_bytes(sha256)
