"""The data aggregation service.

Holds the embedded catalogue, one caching adapter client per configured
source, and the manifest store. Queries are planned purely on metadata;
object bytes move only during source ingestion and when a collection file
is actually accessed. Event-level entries are materialized on first access
by synthesizing a subset file that contains exactly the matched events.
"""

from __future__ import annotations

import hashlib
import logging
import time
from dataclasses import dataclass, field

from ..catalogue import Catalogue, EventRef, Query
from ..extractor import ExtractError, extract, synthesize_subset
from ..adapter.client import AdapterClient, Unreachable
from ..mdd import MddSchema, parse_mdd
from .canon import canonicalize, collection_id, query_to_canonical_obj
from .config import ServiceConfig, SourceConfig
from .manifests import CollectionManifest, ManifestEntry, ManifestStore

log = logging.getLogger(__name__)


class AggregatorError(Exception):
    pass


class UnknownCollection(AggregatorError):
    def __init__(self, cid: str) -> None:
        super().__init__(f"unknown collection {cid}")
        self.collection_id = cid


class UnknownPath(AggregatorError):
    def __init__(self, cid: str, path: str) -> None:
        super().__init__(f"collection {cid} has no entry {path!r}")
        self.collection_id = cid
        self.path = path


class AdapterUnreachable(AggregatorError):
    def __init__(self, source_name: str, cause: Exception) -> None:
        super().__init__(f"adapter for source {source_name!r} unreachable: {cause}")
        self.source_name = source_name


@dataclass
class IngestionReport:
    source_name: str
    files: int = 0
    events: int = 0
    skipped: int = 0
    errors: list[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"source_name": self.source_name, "files": self.files,
                "events": self.events, "skipped": self.skipped,
                "errors": self.errors}


class Aggregator:
    def __init__(self, config: ServiceConfig) -> None:
        self.config = config
        self.catalogue = Catalogue(
            log_path=config.log_path,
            chunk_duration_ns=config.chunk_duration_ns,
        )
        self.manifests = ManifestStore(config.manifests_dir)
        self.clients: dict[str, AdapterClient] = {}
        self.schemas: dict[str, MddSchema] = {}
        self._sources_by_id: dict[int, SourceConfig] = {}
        self._ingest_stats: dict[str, dict] = {}
        for src in config.sources:
            self.clients[src.source_name] = AdapterClient(
                src.adapter_url, config.cache_budget_bytes
            )
            self.schemas[src.source_name] = parse_mdd(src.mdd_path.read_text())
            self._sources_by_id[src.source_id] = src
            self._ingest_stats[src.source_name] = {"files": 0, "events": 0, "skipped": 0}

    def close(self) -> None:
        self.catalogue.close()
        for client in self.clients.values():
            client.close()

    def __enter__(self) -> "Aggregator":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    # -- ingestion --

    def ingest_source(self, source_name: str) -> IngestionReport:
        """Pull every not-yet-catalogued file of one source through the
        extractor. One corrupt file is reported and skipped, never fatal."""
        src = self.config.source(source_name)
        client = self.clients[source_name]
        schema = self.schemas[source_name]
        report = IngestionReport(source_name=source_name)
        try:
            catalog = client.get_catalog()
        except Unreachable as e:
            raise AdapterUnreachable(source_name, e) from e

        for entry in catalog.entries:
            if entry.sha256 in self.catalogue.snapshot().files_by_sha:
                report.skipped += 1
                continue
            try:
                data = client.fetch(entry.sha256)
            except Unreachable as e:
                raise AdapterUnreachable(source_name, e) from e
            try:
                fm, events = extract(data, schema, src.source_id, entry.path)
            except ExtractError as e:
                log.warning("skipping %s/%s: %s", source_name, entry.path, e)
                report.errors.append({"path": entry.path, "error": str(e)})
                report.skipped += 1
                continue
            receipt = self.catalogue.ingest(fm, events)
            if receipt.inserted:
                report.files += 1
                report.events += len(events)
            else:
                report.skipped += 1
        stats = self._ingest_stats[source_name]
        stats["files"] += report.files
        stats["events"] += report.events
        stats["skipped"] += report.skipped
        return report

    def ingest_all(self) -> list[IngestionReport]:
        return [self.ingest_source(s.source_name) for s in self.config.sources]

    # -- queries --

    def handle_query(self, q: Query) -> CollectionManifest:
        """Plan a query and persist its manifest; moves zero object bytes."""
        q.validate()
        state = self.catalogue.snapshot()
        canonical = canonicalize(q)
        cid = collection_id(canonical, state.generation)
        existing = self.manifests.get(cid)
        if existing is not None:
            return existing

        entries: list[ManifestEntry] = []
        if q.level == "file":
            for fm in self.catalogue.query_files(q, state):
                name = self._source_name(fm.source_id)
                entries.append(ManifestEntry(
                    source_name=name,
                    path=f"{name}/{fm.path}",
                    event_count=fm.event_count,
                    size=fm.size,
                    sha256=fm.sha256,
                    orig_path=fm.path,
                    file_sha256=fm.sha256,
                ))
        else:
            refs = self.catalogue.query_events(q, state)
            entries = self._group_event_refs(refs)

        entries.sort(key=lambda e: (e.source_name, e.path))
        manifest = CollectionManifest(
            collection_id=cid,
            level=q.level,
            query=query_to_canonical_obj(q),
            created_at_ns=time.time_ns(),
            entries=entries,
        )
        self.manifests.put(manifest)
        return manifest

    def _group_event_refs(self, refs: list[EventRef]) -> list[ManifestEntry]:
        by_file: dict[str, list[EventRef]] = {}
        for ref in refs:
            by_file.setdefault(ref.sha256, []).append(ref)
        entries = []
        for sha, file_refs in by_file.items():
            first = file_refs[0]
            name = self._source_name(first.source_id)
            indices = tuple(sorted(r.event_index for r in file_refs))
            entries.append(ManifestEntry(
                source_name=name,
                path=f"{name}/{first.path}",
                event_count=len(indices),
                size=None,
                sha256=None,
                orig_path=first.path,
                file_sha256=sha,
                indices=indices,
            ))
        return entries

    def _source_name(self, source_id: int) -> str:
        src = self._sources_by_id.get(source_id)
        return src.source_name if src is not None else str(source_id)

    def get_collection(self, cid: str) -> CollectionManifest:
        manifest = self.manifests.get(cid)
        if manifest is None:
            raise UnknownCollection(cid)
        return manifest

    # -- lazy materialization --

    def get_collection_file(self, cid: str, entry_path: str) -> bytes:
        """Bytes for one manifest entry. File-level entries come straight
        from the owning adapter (digest-verified); event-level entries are
        synthesized once and memoized."""
        manifest = self.get_collection(cid)
        entry = manifest.lookup(entry_path)
        if entry is None:
            raise UnknownPath(cid, entry_path)

        if manifest.level == "file":
            return self._fetch_original(entry)

        memo = self.manifests.memo_get(cid, entry_path)
        if memo is not None:
            return memo
        with self.manifests.entry_lock(cid, entry_path):
            memo = self.manifests.memo_get(cid, entry_path)
            if memo is not None:
                return memo
            original = self._fetch_original(entry)
            schema = self.schemas[entry.source_name]
            subset = synthesize_subset(original, schema, entry.indices or ())
            if entry.size is None:
                entry.size = len(subset)
                entry.sha256 = hashlib.sha256(subset).hexdigest()
                self.manifests.save(manifest)
            self.manifests.memo_put(cid, entry_path, subset)
            return subset

    def _fetch_original(self, entry: ManifestEntry) -> bytes:
        client = self.clients.get(entry.source_name)
        if client is None:
            raise AggregatorError(f"no adapter configured for source {entry.source_name!r}")
        try:
            return client.fetch(entry.file_sha256)
        except Unreachable as e:
            raise AdapterUnreachable(entry.source_name, e) from e

    # -- introspection --

    def sources_stats(self) -> list[dict]:
        out = []
        for src in self.config.sources:
            client = self.clients[src.source_name]
            out.append({
                "source_id": src.source_id,
                "source_name": src.source_name,
                "adapter_url": src.adapter_url,
                "ingest": dict(self._ingest_stats[src.source_name]),
                "cache": {
                    **client.cache.counters.to_json(),
                    "resident_bytes": client.cache.resident_bytes,
                },
            })
        return out
