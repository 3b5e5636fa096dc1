"""Point-in-time, read-only publication of a storage directory.

``publish`` walks a local tree and produces two artifacts in an output
directory: ``catalog.json`` (relative paths with sizes and content hashes,
sorted by path) and ``objects/`` (each distinct content stored exactly once
under its sha256). The source tree is only ever read.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
from dataclasses import dataclass, field
from pathlib import Path

log = logging.getLogger(__name__)

_HEX64_RE = re.compile(r"^[0-9a-f]{64}$")
CATALOG_FILENAME = "catalog.json"
OBJECTS_DIRNAME = "objects"


def is_object_key(value: str) -> bool:
    return bool(_HEX64_RE.match(value))


@dataclass(frozen=True)
class CatalogEntry:
    path: str
    size: int
    sha256: str

    def __post_init__(self):
        if self.path.startswith("/") or ".." in self.path.split("/"):
            raise ValueError(f"non-canonical catalog path {self.path!r}")

    def to_json(self) -> dict:
        return {"path": self.path, "size": self.size, "sha256": self.sha256}


@dataclass(frozen=True)
class ContentCatalog:
    source_id: int
    source_name: str
    generated_at_ns: int
    entries: tuple[CatalogEntry, ...]

    def to_json(self) -> dict:
        return {
            "source_id": self.source_id,
            "source_name": self.source_name,
            "generated_at_ns": self.generated_at_ns,
            "entries": [e.to_json() for e in self.entries],
        }

    def to_json_bytes(self) -> bytes:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":")).encode()

    @classmethod
    def from_json(cls, obj: dict) -> "ContentCatalog":
        entries = tuple(
            CatalogEntry(path=e["path"], size=int(e["size"]), sha256=e["sha256"])
            for e in obj["entries"]
        )
        return cls(
            source_id=int(obj["source_id"]),
            source_name=obj["source_name"],
            generated_at_ns=int(obj["generated_at_ns"]),
            entries=entries,
        )


@dataclass
class PublishReport:
    entries: int = 0
    objects: int = 0
    skipped: list[tuple[str, str]] = field(default_factory=list)  # (path, reason)

    def to_json(self) -> dict:
        return {
            "entries": self.entries,
            "objects": self.objects,
            "skipped": [{"path": p, "reason": r} for p, r in self.skipped],
        }


class ObjectStore:
    """Directory-backed content-addressed store: objects/<aa>/<sha256>."""

    def __init__(self, root: str | Path) -> None:
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _path(self, sha256: str) -> Path:
        return self.root / sha256[:2] / sha256

    def contains(self, sha256: str) -> bool:
        return self._path(sha256).is_file()

    def put_bytes(self, data: bytes) -> str:
        sha256 = hashlib.sha256(data).hexdigest()
        path = self._path(sha256)
        if not path.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_suffix(".tmp")
            tmp.write_bytes(data)
            os.replace(tmp, path)
        return sha256

    def get_bytes(self, sha256: str) -> bytes | None:
        path = self._path(sha256)
        if not path.is_file():
            return None
        return path.read_bytes()

    def object_count(self) -> int:
        return sum(1 for _ in self.root.glob("??/*") if _.is_file())


def publish(root: str | Path, source_id: int, source_name: str,
            out_dir: str | Path) -> tuple[ContentCatalog, ObjectStore, PublishReport]:
    """Snapshot ``root`` into a content catalog plus deduplicated objects.

    Unreadable files are skipped and reported, never fatal. Deterministic:
    publishing an untouched tree twice yields byte-identical catalogs (the
    generation stamp derives from file mtimes, not the wall clock).
    """
    root = Path(root)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    store = ObjectStore(out_dir / OBJECTS_DIRNAME)
    report = PublishReport()

    entries: list[CatalogEntry] = []
    newest_ns = 0
    # Entry order is the catalog contract: strictly ascending path strings.
    paths = sorted(
        ((p.relative_to(root).as_posix(), p) for p in root.rglob("*") if p.is_file()),
        key=lambda pair: pair[0],
    ) if root.exists() else []
    for rel, p in paths:
        try:
            data = p.read_bytes()
            newest_ns = max(newest_ns, p.stat().st_mtime_ns)
        except OSError as e:
            log.warning("skipping unreadable file %s: %s", p, e)
            report.skipped.append((rel, str(e)))
            continue
        sha256 = store.put_bytes(data)
        entries.append(CatalogEntry(path=rel, size=len(data), sha256=sha256))

    catalog = ContentCatalog(
        source_id=source_id,
        source_name=source_name,
        generated_at_ns=newest_ns,
        entries=tuple(entries),
    )
    report.entries = len(entries)
    report.objects = len({e.sha256 for e in entries})
    (out_dir / CATALOG_FILENAME).write_bytes(catalog.to_json_bytes())
    return catalog, store, report


def load_published(published_dir: str | Path) -> tuple[ContentCatalog, ObjectStore]:
    published_dir = Path(published_dir)
    raw = (published_dir / CATALOG_FILENAME).read_bytes()
    catalog = ContentCatalog.from_json(json.loads(raw))
    return catalog, ObjectStore(published_dir / OBJECTS_DIRNAME)
