"""Schema-driven reading of binary event files.

Everything here is generic over an :class:`~appds.mdd.MddSchema`: there is
no format-specific code. ``extract`` validates the whole file structure and
lifts the meta-marked fields into metadata records; ``synthesize_subset``
builds a new, valid file of the same format containing only the selected
events. Record decoding goes through a numpy structured dtype, so a file's
event block is parsed in one ``frombuffer`` call.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from .mdd import FieldSpec, MddSchema, field_offset, header_size, record_size

__all__ = [
    "AttrValue",
    "FileMetadata",
    "EventMetadata",
    "extract",
    "synthesize_subset",
    "event_offset",
    "ExtractError",
    "BadMagic",
    "Truncated",
    "TrailingBytes",
    "NonFiniteFloat",
    "IndexOutOfRange",
    "UnsortedIndices",
]


class ExtractError(Exception):
    """Base class for structural and value errors in event files."""


class BadMagic(ExtractError):
    def __init__(self, fieldname: str, offset: int) -> None:
        super().__init__(f"expect-bytes mismatch for field {fieldname!r} at offset {offset}")
        self.fieldname = fieldname
        self.offset = offset


class Truncated(ExtractError):
    def __init__(self, expected: int, got: int) -> None:
        super().__init__(f"file truncated: need {expected} bytes, have {got}")
        self.expected = expected
        self.got = got


class TrailingBytes(ExtractError):
    def __init__(self, expected: int, got: int) -> None:
        super().__init__(f"{got - expected} trailing bytes after declared content")
        self.expected = expected
        self.got = got


class NonFiniteFloat(ExtractError):
    def __init__(self, fieldname: str, index: int | None) -> None:
        where = "header" if index is None else f"event {index}"
        super().__init__(f"non-finite float in field {fieldname!r} ({where})")
        self.fieldname = fieldname
        self.index = index


class IndexOutOfRange(ExtractError):
    def __init__(self, index: int, count: int) -> None:
        super().__init__(f"event index {index} out of range (file has {count} events)")
        self.index = index
        self.count = count


class UnsortedIndices(ExtractError):
    def __init__(self) -> None:
        super().__init__("subset indices must be strictly increasing")


@dataclass(frozen=True)
class AttrValue:
    """A metadata value: unsigned ("u"), signed ("i") or float ("f")."""

    tag: str
    value: int | float

    def as_float(self) -> float:
        # Predicate comparisons happen in f64; u64 may round, by design.
        return float(self.value)

    def to_json(self) -> dict:
        return {self.tag: self.value}

    @classmethod
    def from_json(cls, obj: dict) -> "AttrValue":
        if not isinstance(obj, dict) or len(obj) != 1:
            raise ValueError(f"bad attr value encoding: {obj!r}")
        tag, value = next(iter(obj.items()))
        if tag in ("u", "i"):
            return cls(tag, int(value))
        if tag == "f":
            return cls(tag, float(value))
        raise ValueError(f"bad attr value tag: {tag!r}")


def _attrs_to_json(attrs: dict[str, AttrValue]) -> dict:
    return {k: v.to_json() for k, v in attrs.items()}


def _attrs_from_json(obj: dict) -> dict[str, AttrValue]:
    return {k: AttrValue.from_json(v) for k, v in obj.items()}


@dataclass(frozen=True)
class FileMetadata:
    source_id: int
    path: str
    size: int
    sha256: str
    format_name: str
    event_count: int
    time_min_ns: int | None
    time_max_ns: int | None
    header_attrs: dict[str, AttrValue] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "source_id": self.source_id,
            "path": self.path,
            "size": self.size,
            "sha256": self.sha256,
            "format_name": self.format_name,
            "event_count": self.event_count,
            "time_min_ns": self.time_min_ns,
            "time_max_ns": self.time_max_ns,
            "header_attrs": _attrs_to_json(self.header_attrs),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "FileMetadata":
        return cls(
            source_id=int(obj["source_id"]),
            path=str(obj["path"]),
            size=int(obj["size"]),
            sha256=str(obj["sha256"]),
            format_name=str(obj["format_name"]),
            event_count=int(obj["event_count"]),
            time_min_ns=None if obj["time_min_ns"] is None else int(obj["time_min_ns"]),
            time_max_ns=None if obj["time_max_ns"] is None else int(obj["time_max_ns"]),
            header_attrs=_attrs_from_json(obj["header_attrs"]),
        )


@dataclass(frozen=True)
class EventMetadata:
    sha256: str
    event_index: int
    timestamp_ns: int
    attrs: dict[str, AttrValue]


_NP_FORMATS = {
    "u8": "u1", "u16": "u2", "u32": "u4", "u64": "u8",
    "i8": "i1", "i16": "i2", "i32": "i4", "i64": "i8",
    "f32": "f4", "f64": "f8",
}


def _np_format(f: FieldSpec) -> str:
    if f.type.is_bytes:
        return f"V{f.type.width}"
    return "<" + _NP_FORMATS[f.type.kind]


@lru_cache(maxsize=64)
def _dtypes(schema: MddSchema) -> tuple[np.dtype, np.dtype]:
    header = np.dtype([(f.name, _np_format(f)) for f in schema.header_fields])
    event = np.dtype([(f.name, _np_format(f)) for f in schema.event_fields])
    assert header.itemsize == header_size(schema)
    assert event.itemsize == record_size(schema)
    return header, event


def _tag_for(f: FieldSpec) -> str:
    if f.type.is_float:
        return "f"
    return "i" if f.type.is_signed else "u"


def _scalar(f: FieldSpec, raw) -> int | float:
    return float(raw) if f.type.is_float else int(raw)


def event_offset(schema: MddSchema, index: int) -> int:
    """Byte offset of the index-th event record (O(1), fixed-size records)."""
    return header_size(schema) + index * record_size(schema)


def _check_expects(data: bytes, schema: MddSchema) -> None:
    for f in schema.header_fields:
        if f.expect is None:
            continue
        off = field_offset(schema.header_fields, f.name)
        if bytes(data[off:off + f.type.width]) != f.expect:
            raise BadMagic(f.name, off)


def _validate_structure(data: bytes, schema: MddSchema) -> int:
    """Check header expects and total length; returns the event count."""
    hs = header_size(schema)
    if len(data) < hs:
        raise Truncated(hs, len(data))
    _check_expects(data, schema)
    header_dtype, _ = _dtypes(schema)
    header = np.frombuffer(data, dtype=header_dtype, count=1)[0]
    count = int(header[schema.repeat_ref])
    expected = hs + count * record_size(schema)
    if len(data) < expected:
        raise Truncated(expected, len(data))
    if len(data) > expected:
        raise TrailingBytes(expected, len(data))
    return count


def extract(
    data: bytes, schema: MddSchema, source_id: int, path: str
) -> tuple[FileMetadata, list[EventMetadata]]:
    """Validate ``data`` against ``schema`` and pull out all metadata.

    The input is never modified. Raises a declared ``ExtractError`` on any
    structural problem; arbitrary byte sequences never crash.
    """
    count = _validate_structure(data, schema)
    hs = header_size(schema)
    header_dtype, event_dtype = _dtypes(schema)
    header = np.frombuffer(data, dtype=header_dtype, count=1)[0]

    header_attrs: dict[str, AttrValue] = {}
    for f in schema.meta_header_fields:
        value = _scalar(f, header[f.name])
        if f.type.is_float and not np.isfinite(value):
            raise NonFiniteFloat(f.name, None)
        header_attrs[f.name] = AttrValue(_tag_for(f), value)

    sha256 = hashlib.sha256(data).hexdigest()
    if count == 0:
        meta = FileMetadata(
            source_id=source_id, path=path, size=len(data), sha256=sha256,
            format_name=schema.format_name, event_count=0,
            time_min_ns=None, time_max_ns=None, header_attrs=header_attrs,
        )
        return meta, []

    records = np.frombuffer(data, dtype=event_dtype, count=count, offset=hs)
    columns: dict[str, np.ndarray] = {}
    for f in schema.meta_event_fields:
        col = records[f.name]
        if f.type.is_float:
            bad = ~np.isfinite(col)
            if bad.any():
                raise NonFiniteFloat(f.name, int(np.flatnonzero(bad)[0]))
        columns[f.name] = col

    ts_col = records[schema.timestamp_field]
    time_min = int(ts_col.min())
    time_max = int(ts_col.max())

    meta_fields = schema.meta_event_fields
    events = []
    for i in range(count):
        attrs = {
            f.name: AttrValue(_tag_for(f), _scalar(f, columns[f.name][i]))
            for f in meta_fields
        }
        events.append(
            EventMetadata(
                sha256=sha256,
                event_index=i,
                timestamp_ns=int(ts_col[i]),
                attrs=attrs,
            )
        )

    meta = FileMetadata(
        source_id=source_id, path=path, size=len(data), sha256=sha256,
        format_name=schema.format_name, event_count=count,
        time_min_ns=time_min, time_max_ns=time_max, header_attrs=header_attrs,
    )
    return meta, events


def synthesize_subset(data: bytes, schema: MddSchema, indices: Sequence[int]) -> bytes:
    """Build a new valid file containing only the events at ``indices``.

    The header is copied verbatim apart from the repeat-count field, which is
    rewritten to ``len(indices)``; selected records are copied byte-identically
    in input order, so provenance fields in the header survive.
    """
    count = _validate_structure(data, schema)
    prev = -1
    for idx in indices:
        if idx <= prev:
            raise UnsortedIndices()
        if idx >= count:
            raise IndexOutOfRange(idx, count)
        prev = idx

    hs = header_size(schema)
    rs = record_size(schema)
    ref = schema.header_field(schema.repeat_ref)
    ref_off = field_offset(schema.header_fields, schema.repeat_ref)

    header = bytearray(data[:hs])
    header[ref_off:ref_off + ref.type.width] = len(indices).to_bytes(
        ref.type.width, "little"
    )
    body = b"".join(data[hs + i * rs: hs + (i + 1) * rs] for i in indices)
    return bytes(header) + body


def iter_raw_records(data: bytes, schema: MddSchema) -> Iterator[bytes]:
    """Yield each event record's raw bytes (file must be structurally valid)."""
    count = _validate_structure(data, schema)
    hs = header_size(schema)
    rs = record_size(schema)
    for i in range(count):
        yield data[hs + i * rs: hs + (i + 1) * rs]
