"""Embedded time-chunked metadata store (the catalogue).

Event rows are partitioned into fixed-duration time chunks; every chunk
keeps columnar f64 copies of its attribute values (NaN = row lacks the
attribute) plus a min/max sparse index per attribute, which is what query
planning prunes against.

Concurrency is single-writer / multiple-reader: one ingest at a time,
any number of concurrent queries. Ingest never mutates published state;
it builds fresh chunk objects and swaps in a whole new immutable state,
so a reader always sees the catalogue as of some prefix of completed
ingests.

Durability is a JSON-lines append-only log, one record per file/event
row, fsynced per ingest batch. A torn final write is recovered by
truncating back to the last complete batch.
"""

from __future__ import annotations

import errno
import json
import logging
import os
import threading
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..extractor import EventMetadata, FileMetadata, _attrs_from_json, _attrs_to_json
from . import kernels
from .types import (
    CorruptLog,
    EventRef,
    InconsistentBatch,
    IngestReceipt,
    Query,
    StorageFull,
    attrs_match,
)

log = logging.getLogger(__name__)

DEFAULT_CHUNK_DURATION_NS = 3_600_000_000_000  # one hour

_JSON_SEP = (",", ":")


class Chunk:
    """Immutable column store for one time partition."""

    __slots__ = ("chunk_id", "ts", "file_ord", "event_index", "source_ids",
                 "columns", "sparse_index", "n_rows")

    def __init__(self, chunk_id, ts, file_ord, event_index, source_ids, columns):
        self.chunk_id = chunk_id
        self.ts = ts
        self.file_ord = file_ord
        self.event_index = event_index
        self.source_ids = source_ids
        self.columns = columns
        self.n_rows = int(ts.shape[0])
        self.sparse_index = self._compute_sparse(columns)

    @staticmethod
    def _compute_sparse(columns) -> dict[str, tuple[float, float]]:
        sparse = {}
        for name, col in columns.items():
            mn, mx, count = kernels.column_minmax(col)
            if count > 0:
                sparse[name] = (mn, mx)
        return sparse

    def recompute_sparse(self) -> dict[str, tuple[float, float]]:
        return self._compute_sparse(self.columns)

    def span(self, chunk_duration_ns: int) -> tuple[int, int]:
        lo = self.chunk_id * chunk_duration_ns
        return (lo, lo + chunk_duration_ns)  # half-open


@dataclass(frozen=True)
class CatalogueState:
    """One immutable, fully consistent view of the catalogue."""

    files_by_sha: dict[str, int]
    files: tuple[FileMetadata, ...]
    chunks: dict[int, Chunk]
    generation: int


_EMPTY_STATE = CatalogueState(files_by_sha={}, files=(), chunks={}, generation=0)


def _check_batch(fm: FileMetadata, events: list[EventMetadata]) -> None:
    if len(events) != fm.event_count:
        raise InconsistentBatch(
            f"file declares {fm.event_count} events, batch has {len(events)}"
        )
    for i, ev in enumerate(events):
        if ev.event_index != i:
            raise InconsistentBatch(f"event {i} carries index {ev.event_index}")
        if ev.sha256 != fm.sha256:
            raise InconsistentBatch(f"event {i} belongs to a different file")
        if not 0 <= ev.timestamp_ns < 2 ** 64:
            raise InconsistentBatch(f"event {i} timestamp out of u64 range")


def _merge_chunk(old: Chunk | None, chunk_id: int, events: list[EventMetadata],
                 file_ord: int, source_id: int) -> Chunk:
    n = len(events)
    ts = np.fromiter((ev.timestamp_ns for ev in events), dtype=np.uint64, count=n)
    idx = np.fromiter((ev.event_index for ev in events), dtype=np.uint64, count=n)
    ords = np.full(n, file_ord, dtype=np.uint32)
    srcs = np.full(n, source_id, dtype=np.uint16)
    names: set[str] = set()
    for ev in events:
        names.update(ev.attrs)
    cols = {
        name: np.fromiter(
            (ev.attrs[name].as_float() if name in ev.attrs else np.nan for ev in events),
            dtype=np.float64, count=n,
        )
        for name in names
    }
    if old is None:
        return Chunk(chunk_id, ts, ords, idx, srcs, cols)

    merged_cols = {}
    nan_old = None
    for name in set(old.columns) | set(cols):
        left = old.columns.get(name)
        if left is None:
            if nan_old is None:
                nan_old = np.full(old.n_rows, np.nan)
            left = nan_old
        right = cols.get(name)
        if right is None:
            right = np.full(n, np.nan)
        merged_cols[name] = np.concatenate([left, right])
    return Chunk(
        chunk_id,
        np.concatenate([old.ts, ts]),
        np.concatenate([old.file_ord, ords]),
        np.concatenate([old.event_index, idx]),
        np.concatenate([old.source_ids, srcs]),
        merged_cols,
    )


def _apply_batch(state: CatalogueState, fm: FileMetadata,
                 events: list[EventMetadata], chunk_ns: int) -> CatalogueState:
    file_ord = len(state.files)
    per_chunk: dict[int, list[EventMetadata]] = {}
    for ev in events:
        per_chunk.setdefault(ev.timestamp_ns // chunk_ns, []).append(ev)
    chunks = dict(state.chunks)
    for cid, evs in per_chunk.items():
        chunks[cid] = _merge_chunk(chunks.get(cid), cid, evs, file_ord, fm.source_id)
    files_by_sha = dict(state.files_by_sha)
    files_by_sha[fm.sha256] = file_ord
    return CatalogueState(
        files_by_sha=files_by_sha,
        files=state.files + (fm,),
        chunks=chunks,
        generation=state.generation + 1,
    )


def _event_record(ev: EventMetadata) -> dict:
    return {"t": "event", "sha256": ev.sha256, "idx": ev.event_index,
            "ts": ev.timestamp_ns, "attrs": _attrs_to_json(ev.attrs)}


def _event_from_record(obj: dict) -> EventMetadata:
    return EventMetadata(
        sha256=str(obj["sha256"]),
        event_index=int(obj["idx"]),
        timestamp_ns=int(obj["ts"]),
        attrs=_attrs_from_json(obj["attrs"]),
    )


class Catalogue:
    """SWMR metadata catalogue over an optional append-only log.

    With ``log_path=None`` the catalogue is memory-only (useful in tests);
    otherwise the log is replayed on open and appended per ingest.
    """

    def __init__(self, log_path: str | Path | None = None,
                 chunk_duration_ns: int = DEFAULT_CHUNK_DURATION_NS,
                 recover_tail: bool = True) -> None:
        if chunk_duration_ns <= 0:
            raise ValueError("chunk_duration_ns must be positive")
        self.chunk_duration_ns = chunk_duration_ns
        self.log_path = Path(log_path) if log_path is not None else None
        self.recovered_tail_line: int | None = None
        self._state = _EMPTY_STATE
        self._write_lock = threading.Lock()
        self._fh = None
        if self.log_path is not None:
            if self.log_path.exists():
                self._replay(recover_tail)
            else:
                self.log_path.parent.mkdir(parents=True, exist_ok=True)
            self._fh = open(self.log_path, "ab")

    # -- lifecycle --

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None

    def __enter__(self) -> "Catalogue":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    # -- write path --

    def ingest(self, fm: FileMetadata, events: list[EventMetadata]) -> IngestReceipt:
        """Insert one extracted file plus its event rows; idempotent on sha256."""
        with self._write_lock:
            state = self._state
            if fm.sha256 in state.files_by_sha:
                return IngestReceipt(inserted=False)
            _check_batch(fm, events)
            self._append_batch(fm, events)
            # The swap publishes the whole batch at once: readers see either
            # the previous state or this one, never a partial ingest.
            self._state = _apply_batch(state, fm, events, self.chunk_duration_ns)
            return IngestReceipt(inserted=True)

    def _append_batch(self, fm: FileMetadata, events: list[EventMetadata]) -> None:
        if self._fh is None:
            return
        lines = [json.dumps({"t": "file", **fm.to_json()}, separators=_JSON_SEP)]
        lines += [json.dumps(_event_record(ev), separators=_JSON_SEP) for ev in events]
        buf = ("\n".join(lines) + "\n").encode()
        self._fh.seek(0, os.SEEK_END)
        start = self._fh.tell()
        try:
            self._fh.write(buf)
            self._fh.flush()
            os.fsync(self._fh.fileno())
        except OSError as e:
            try:
                self._fh.truncate(start)
            except OSError:
                pass
            if e.errno == errno.ENOSPC:
                raise StorageFull(str(e)) from e
            raise

    # -- restore path --

    def _replay(self, recover_tail: bool) -> None:
        data = self.log_path.read_bytes()
        state = _EMPTY_STATE
        pending: tuple[FileMetadata, list[EventMetadata], int, int] | None = None
        truncate_at: int | None = None

        def fail(lineno: int, offset: int, reason: str, is_tail: bool):
            nonlocal truncate_at
            if is_tail and recover_tail:
                truncate_at = offset
                self.recovered_tail_line = lineno
                log.warning("dropping torn log tail at %s:%d (%s)",
                            self.log_path, lineno, reason)
                return True
            raise CorruptLog(lineno, reason)

        offset = 0
        lineno = 0
        length = len(data)
        stop = False
        while offset < length and not stop:
            lineno += 1
            nl = data.find(b"\n", offset)
            terminated = nl >= 0
            end = nl if terminated else length
            line = data[offset:end]
            line_start = offset
            offset = end + 1 if terminated else length
            is_tail = offset >= length

            try:
                obj = json.loads(line)
                kind = obj["t"]
            except (ValueError, KeyError, TypeError) as e:
                batch_off = pending[2] if pending is not None else line_start
                stop = fail(lineno, batch_off, f"unparseable record: {e}", is_tail)
                continue

            try:
                if kind == "file":
                    if pending is not None:
                        raise CorruptLog(lineno, "file record while batch incomplete")
                    fm = FileMetadata.from_json(obj)
                    if fm.event_count == 0:
                        state = self._replay_apply(state, fm, [], lineno)
                    else:
                        pending = (fm, [], line_start, lineno)
                elif kind == "event":
                    if pending is None:
                        raise CorruptLog(lineno, "event record without an open batch")
                    fm, evs, batch_off, batch_line = pending
                    evs.append(_event_from_record(obj))
                    if len(evs) == fm.event_count:
                        state = self._replay_apply(state, fm, evs, batch_line)
                        pending = None
                else:
                    raise CorruptLog(lineno, f"unknown record type {kind!r}")
            except CorruptLog as e:
                batch_off = pending[2] if pending is not None else line_start
                stop = fail(e.line, batch_off, e.reason, is_tail)
                if stop:
                    pending = None
            except (ValueError, KeyError, TypeError) as e:
                batch_off = pending[2] if pending is not None else line_start
                stop = fail(lineno, batch_off, f"bad record: {e}", is_tail)
                if stop:
                    pending = None

        if pending is not None:
            fm, evs, batch_off, batch_line = pending
            fail(batch_line, batch_off, "incomplete trailing batch", True)

        if truncate_at is not None:
            with open(self.log_path, "r+b") as fh:
                fh.truncate(truncate_at)
        elif length and not data.endswith(b"\n"):
            # Final record parsed fine but lost its newline; repair so the
            # next append starts on a fresh line.
            with open(self.log_path, "ab") as fh:
                fh.write(b"\n")
        self._state = state

    def _replay_apply(self, state, fm, events, lineno) -> CatalogueState:
        if fm.sha256 in state.files_by_sha:
            return state  # duplicate records are a no-op on replay
        try:
            _check_batch(fm, events)
        except InconsistentBatch as e:
            raise CorruptLog(lineno, str(e)) from e
        return _apply_batch(state, fm, events, self.chunk_duration_ns)

    # -- read path --

    def snapshot(self) -> CatalogueState:
        """Current immutable state; safe to query without locking."""
        return self._state

    @property
    def generation(self) -> int:
        return self._state.generation

    @property
    def file_count(self) -> int:
        return len(self._state.files)

    @property
    def event_count(self) -> int:
        return sum(c.n_rows for c in self._state.chunks.values())

    def chunks(self) -> dict[int, Chunk]:
        return dict(self._state.chunks)

    def query_files(self, q: Query, state: CatalogueState | None = None) -> list[FileMetadata]:
        """Files whose time interval overlaps the range and whose header
        attrs satisfy every predicate; ordered by (source_id, path)."""
        q.validate(expect_level="file")
        state = state if state is not None else self._state
        out = []
        for fm in state.files:
            if q.sources is not None and fm.source_id not in q.sources:
                continue
            if q.time_range is not None:
                if fm.time_min_ns is None or fm.time_max_ns is None:
                    continue
                if fm.time_max_ns < q.time_range.from_ns or fm.time_min_ns > q.time_range.to_ns:
                    continue
            if not attrs_match(q.predicates, fm.header_attrs):
                continue
            out.append(fm)
        out.sort(key=lambda f: (f.source_id, f.path))
        if q.limit is not None:
            out = out[:q.limit]
        return out

    def plan(self, q: Query, state: CatalogueState | None = None) -> list[int]:
        """Chunk ids that survive pruning (a superset of all matching rows)."""
        q.validate(expect_level="event")
        state = state if state is not None else self._state
        D = self.chunk_duration_ns
        out = []
        for cid in sorted(state.chunks):
            chunk = state.chunks[cid]
            if q.time_range is not None:
                lo, hi = chunk.span(D)
                if hi <= q.time_range.from_ns or lo > q.time_range.to_ns:
                    continue
            pruned = False
            for p in q.predicates:
                bounds = chunk.sparse_index.get(p.attr)
                if bounds is None or p.prunes(*bounds):
                    pruned = True
                    break
            if not pruned:
                out.append(cid)
        return out

    def scan_chunks(self, q: Query, chunk_ids: list[int],
                    state: CatalogueState | None = None) -> list[EventRef]:
        """Filter the given chunks row-by-row; canonical result order."""
        q.validate(expect_level="event")
        state = state if state is not None else self._state
        refs: list[EventRef] = []
        for cid in chunk_ids:
            chunk = state.chunks.get(cid)
            if chunk is not None:
                refs.extend(_scan_chunk(state, chunk, q))
        refs.sort()
        return refs

    def query_events(self, q: Query, state: CatalogueState | None = None) -> list[EventRef]:
        """Events matching time range, sources and all predicates; ordered by
        (timestamp_ns, source_id, path, event_index). Equal to a full scan."""
        q.validate(expect_level="event")
        state = state if state is not None else self._state
        refs = self.scan_chunks(q, self.plan(q, state), state)
        if q.limit is not None:
            refs = refs[:q.limit]
        return refs


def _scan_chunk(state: CatalogueState, chunk: Chunk, q: Query) -> list[EventRef]:
    mask = None
    if q.time_range is not None:
        mask = kernels.time_mask(chunk.ts, q.time_range.from_ns, q.time_range.to_ns)
    for p in q.predicates:
        col = chunk.columns.get(p.attr)
        if col is None:
            return []
        m = kernels.cmp_mask(col, kernels.OP_CODES[p.op], p.lo,
                             p.hi if p.hi is not None else 0.0)
        mask = m if mask is None else mask & m
    if q.sources is not None:
        m = np.isin(chunk.source_ids, np.fromiter(q.sources, dtype=np.uint16))
        mask = m if mask is None else mask & m
    rows = np.flatnonzero(mask) if mask is not None else range(chunk.n_rows)
    files = state.files
    file_ord = chunk.file_ord
    event_index = chunk.event_index
    ts = chunk.ts
    refs = []
    for i in rows:
        fm = files[file_ord[i]]
        refs.append(EventRef(int(ts[i]), fm.source_id, fm.path,
                             int(event_index[i]), fm.sha256))
    return refs
