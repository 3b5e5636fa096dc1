"""Collection manifests: the persisted result of one query.

Each manifest lives as one JSON file under the manifests directory, keyed
by collection id. Entries keep the owning file's digest and (for
event-level collections) the matched event indices, which is all the
materializer needs later; those internals stay out of the public wire
form.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from pathlib import Path

from ..adapter.client import LruByteCache


@dataclass
class ManifestEntry:
    source_name: str
    path: str                      # "<source_name>/<original relative path>"
    event_count: int
    size: int | None
    sha256: str | None
    # Materialization internals, not part of the public JSON shape:
    orig_path: str = ""
    file_sha256: str = ""
    indices: tuple[int, ...] | None = None

    def to_public_json(self) -> dict:
        return {
            "source_name": self.source_name,
            "path": self.path,
            "event_count": self.event_count,
            "size": self.size,
            "sha256": self.sha256,
        }

    def to_json(self) -> dict:
        obj = self.to_public_json()
        obj["orig_path"] = self.orig_path
        obj["file_sha256"] = self.file_sha256
        obj["indices"] = None if self.indices is None else list(self.indices)
        return obj

    @classmethod
    def from_json(cls, obj: dict) -> "ManifestEntry":
        indices = obj.get("indices")
        return cls(
            source_name=obj["source_name"],
            path=obj["path"],
            event_count=int(obj["event_count"]),
            size=None if obj.get("size") is None else int(obj["size"]),
            sha256=obj.get("sha256"),
            orig_path=obj.get("orig_path", ""),
            file_sha256=obj.get("file_sha256", ""),
            indices=None if indices is None else tuple(int(i) for i in indices),
        )


@dataclass
class CollectionManifest:
    collection_id: str
    level: str
    query: dict                    # canonical query object
    created_at_ns: int
    entries: list[ManifestEntry] = field(default_factory=list)

    def to_public_json(self) -> dict:
        return {
            "collection_id": self.collection_id,
            "level": self.level,
            "query": self.query,
            "created_at_ns": self.created_at_ns,
            "entries": [e.to_public_json() for e in self.entries],
        }

    def to_json(self) -> dict:
        obj = self.to_public_json()
        obj["entries"] = [e.to_json() for e in self.entries]
        return obj

    @classmethod
    def from_json(cls, obj: dict) -> "CollectionManifest":
        return cls(
            collection_id=obj["collection_id"],
            level=obj["level"],
            query=obj["query"],
            created_at_ns=int(obj["created_at_ns"]),
            entries=[ManifestEntry.from_json(e) for e in obj["entries"]],
        )

    def lookup(self, entry_path: str) -> ManifestEntry | None:
        for e in self.entries:
            if e.path == entry_path:
                return e
        return None


class ManifestStore:
    """Directory of manifest JSON files plus an in-memory byte memo for
    materialized subset files (bounded, LRU)."""

    def __init__(self, directory: str | Path, memo_budget_bytes: int = 128 * 1024 * 1024) -> None:
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._loaded: dict[str, CollectionManifest] = {}
        self._lock = threading.Lock()
        self._memo = LruByteCache(memo_budget_bytes)
        self._entry_locks: dict[tuple[str, str], threading.Lock] = {}

    def _path(self, collection_id: str) -> Path:
        return self.directory / f"{collection_id}.json"

    def get(self, collection_id: str) -> CollectionManifest | None:
        with self._lock:
            manifest = self._loaded.get(collection_id)
            if manifest is not None:
                return manifest
        path = self._path(collection_id)
        if not path.is_file():
            return None
        manifest = CollectionManifest.from_json(json.loads(path.read_text()))
        with self._lock:
            return self._loaded.setdefault(collection_id, manifest)

    def put(self, manifest: CollectionManifest) -> None:
        with self._lock:
            self._loaded[manifest.collection_id] = manifest
        self.save(manifest)

    def save(self, manifest: CollectionManifest) -> None:
        self._path(manifest.collection_id).write_text(json.dumps(manifest.to_json()))

    def entry_lock(self, collection_id: str, entry_path: str) -> threading.Lock:
        key = (collection_id, entry_path)
        with self._lock:
            lock = self._entry_locks.get(key)
            if lock is None:
                lock = self._entry_locks[key] = threading.Lock()
            return lock

    def memo_get(self, collection_id: str, entry_path: str) -> bytes | None:
        return self._memo.get(f"{collection_id}/{entry_path}")

    def memo_put(self, collection_id: str, entry_path: str, data: bytes) -> None:
        self._memo.put(f"{collection_id}/{entry_path}", data)
