"""Declarative description of fixed-layout binary event files (MDD).

An MDD file names a format, fixes the byte order and lists the header and
event-record fields in order. Fields tagged ``meta`` are the ones lifted
into the metadata catalogue; exactly one event field tagged
``key=timestamp`` supplies the time axis (u64 nanoseconds since the UNIX
epoch). The grammar is line-oriented with significant two-space indentation:

    format <ident>
    endian little
    header:
      <name>: <type> [expect "<ascii>"] [meta]
    events repeat header.<name>:
      <name>: <type> [meta] [key=timestamp]

``<type>`` is one of u8..u64, i8..i64, f32, f64 or bytes[N]. ``#`` starts a
comment (outside quotes), blank lines are skipped. Records are fixed size,
so the i-th event record always starts at ``header_size + i * record_size``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

__all__ = [
    "ScalarType",
    "FieldSpec",
    "MddSchema",
    "parse_mdd",
    "to_text",
    "header_size",
    "record_size",
    "field_offset",
    "MddError",
    "MddSyntaxError",
    "UnknownRepeatRef",
    "DuplicateFieldName",
    "MissingTimestampKey",
    "MultipleTimestampKeys",
    "InvalidExpectWidth",
    "UnsupportedEndianness",
]


class MddError(Exception):
    """Base class for MDD parsing and validation failures."""


class MddSyntaxError(MddError):
    def __init__(self, line: int, reason: str) -> None:
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class UnknownRepeatRef(MddError):
    def __init__(self, name: str) -> None:
        super().__init__(f"events repeat references unknown header field {name!r}")
        self.name = name


class DuplicateFieldName(MddError):
    def __init__(self, name: str, line: int) -> None:
        super().__init__(f"line {line}: duplicate field name {name!r}")
        self.name = name
        self.line = line


class MissingTimestampKey(MddError):
    def __init__(self) -> None:
        super().__init__("no event field is marked key=timestamp")


class MultipleTimestampKeys(MddError):
    def __init__(self, names: list[str]) -> None:
        super().__init__(f"multiple event fields marked key=timestamp: {names}")
        self.names = names


class InvalidExpectWidth(MddError):
    def __init__(self, name: str, want: int, got: int) -> None:
        super().__init__(
            f"expect bytes for field {name!r} have length {got}, field width is {want}"
        )
        self.name = name


class UnsupportedEndianness(MddError):
    def __init__(self, value: str) -> None:
        super().__init__(f"unsupported endianness {value!r} (only 'little')")
        self.value = value


_IDENT_RE = re.compile(r"^[a-z_][a-z0-9_]*$")
_NUMERIC_WIDTHS = {
    "u8": 1, "u16": 2, "u32": 4, "u64": 8,
    "i8": 1, "i16": 2, "i32": 4, "i64": 8,
    "f32": 4, "f64": 8,
}
_REPEAT_KINDS = ("u16", "u32", "u64")


@dataclass(frozen=True)
class ScalarType:
    """A primitive field type: a fixed-width numeric or a raw byte run."""

    kind: str
    width: int

    @classmethod
    def numeric(cls, kind: str) -> "ScalarType":
        return cls(kind, _NUMERIC_WIDTHS[kind])

    @classmethod
    def bytes_(cls, width: int) -> "ScalarType":
        if width <= 0:
            raise ValueError("bytes width must be positive")
        return cls("bytes", width)

    @property
    def is_bytes(self) -> bool:
        return self.kind == "bytes"

    @property
    def is_float(self) -> bool:
        return self.kind in ("f32", "f64")

    @property
    def is_signed(self) -> bool:
        return self.kind.startswith("i")

    @property
    def is_unsigned(self) -> bool:
        return self.kind.startswith("u") and not self.is_bytes

    def spelling(self) -> str:
        return f"bytes[{self.width}]" if self.is_bytes else self.kind


@dataclass(frozen=True)
class FieldSpec:
    name: str
    type: ScalarType
    is_meta: bool = False
    expect: bytes | None = None
    is_timestamp_key: bool = False

    def spelling(self) -> str:
        parts = [f"{self.name}: {self.type.spelling()}"]
        if self.expect is not None:
            # The grammar has no escapes, so a literal '"' cannot be spelled.
            if b'"' in self.expect:
                raise ValueError(
                    f"expect bytes for {self.name!r} contain '\"' and have no MDD spelling"
                )
            parts.append('expect "%s"' % self.expect.decode("ascii"))
        if self.is_meta:
            parts.append("meta")
        if self.is_timestamp_key:
            parts.append("key=timestamp")
        return " ".join(parts)


@dataclass(frozen=True)
class MddSchema:
    format_name: str
    endianness: str
    header_fields: tuple[FieldSpec, ...]
    event_fields: tuple[FieldSpec, ...]
    repeat_ref: str

    @property
    def timestamp_field(self) -> str:
        for f in self.event_fields:
            if f.is_timestamp_key:
                return f.name
        raise MissingTimestampKey()

    def header_field(self, name: str) -> FieldSpec:
        for f in self.header_fields:
            if f.name == name:
                return f
        raise UnknownRepeatRef(name)

    def validate(self) -> None:
        """Re-check every schema invariant; raises an MddError subclass."""
        if self.endianness != "little":
            raise UnsupportedEndianness(self.endianness)
        if not _IDENT_RE.match(self.format_name):
            raise MddSyntaxError(0, f"invalid format name {self.format_name!r}")
        for fields in (self.header_fields, self.event_fields):
            seen: set[str] = set()
            for f in fields:
                if not _IDENT_RE.match(f.name):
                    raise MddSyntaxError(0, f"invalid field name {f.name!r}")
                if f.name in seen:
                    raise DuplicateFieldName(f.name, 0)
                seen.add(f.name)
                if f.expect is not None and len(f.expect) != f.type.width:
                    raise InvalidExpectWidth(f.name, f.type.width, len(f.expect))
                if f.is_meta and f.type.is_bytes:
                    raise MddSyntaxError(0, f"meta field {f.name!r} must be numeric")
                if f.is_timestamp_key and (f.type.kind != "u64" or not f.is_meta):
                    raise MddSyntaxError(
                        0, f"timestamp key {f.name!r} must be 'u64' and 'meta'"
                    )
        keys = [f.name for f in self.event_fields if f.is_timestamp_key]
        if any(f.is_timestamp_key for f in self.header_fields):
            raise MddSyntaxError(0, "key=timestamp is only valid on event fields")
        if not keys:
            raise MissingTimestampKey()
        if len(keys) > 1:
            raise MultipleTimestampKeys(keys)
        ref = self.header_field(self.repeat_ref)
        if ref.type.kind not in _REPEAT_KINDS:
            raise MddSyntaxError(
                0, f"repeat field {self.repeat_ref!r} must be one of {_REPEAT_KINDS}"
            )

    # Convenience views used all over the extractor.
    @property
    def meta_header_fields(self) -> tuple[FieldSpec, ...]:
        return tuple(f for f in self.header_fields if f.is_meta)

    @property
    def meta_event_fields(self) -> tuple[FieldSpec, ...]:
        return tuple(f for f in self.event_fields if f.is_meta)


def header_size(schema: MddSchema) -> int:
    return sum(f.type.width for f in schema.header_fields)


def record_size(schema: MddSchema) -> int:
    return sum(f.type.width for f in schema.event_fields)


def field_offset(fields: tuple[FieldSpec, ...], name: str) -> int:
    """Byte offset of ``name`` within a packed run of ``fields``."""
    off = 0
    for f in fields:
        if f.name == name:
            return off
        off += f.type.width
    raise KeyError(name)


def to_text(schema: MddSchema) -> str:
    """Serialize back to canonical MDD text (single spaces, no comments)."""
    lines = [f"format {schema.format_name}", f"endian {schema.endianness}", "header:"]
    lines += [f"  {f.spelling()}" for f in schema.header_fields]
    lines.append(f"events repeat header.{schema.repeat_ref}:")
    lines += [f"  {f.spelling()}" for f in schema.event_fields]
    return "\n".join(lines) + "\n"


_TYPE_RE = re.compile(r"^(u8|u16|u32|u64|i8|i16|i32|i64|f32|f64|bytes\[([1-9][0-9]*)\])$")
_FIELD_RE = re.compile(r"^([a-z_][a-z0-9_]*):\s+(\S+)(.*)$")
_MODIFIER_RE = re.compile(r'\s+(?:(meta)|(key=timestamp)|expect\s+"([^"]*)")')


def _strip_comment(line: str) -> str:
    # '#' starts a comment unless it sits inside an expect "..." literal.
    in_quote = False
    for i, ch in enumerate(line):
        if ch == '"':
            in_quote = not in_quote
        elif ch == "#" and not in_quote:
            return line[:i]
    return line


def _parse_type(token: str, lineno: int) -> ScalarType:
    m = _TYPE_RE.match(token)
    if not m:
        raise MddSyntaxError(lineno, f"unknown type {token!r}")
    if m.group(2) is not None:
        return ScalarType.bytes_(int(m.group(2)))
    return ScalarType.numeric(m.group(1))


def _parse_field(content: str, lineno: int, *, in_header: bool) -> FieldSpec:
    m = _FIELD_RE.match(content)
    if not m:
        raise MddSyntaxError(lineno, f"malformed field line {content!r}")
    name, type_tok, rest = m.group(1), m.group(2), m.group(3)
    ftype = _parse_type(type_tok, lineno)
    is_meta = False
    is_key = False
    expect: bytes | None = None
    pos = 0
    while pos < len(rest):
        mm = _MODIFIER_RE.match(rest, pos)
        if not mm:
            if rest[pos:].strip():
                raise MddSyntaxError(lineno, f"unexpected token {rest[pos:].strip()!r}")
            break
        if mm.group(1):
            if is_meta:
                raise MddSyntaxError(lineno, "duplicate 'meta'")
            is_meta = True
        elif mm.group(2):
            if is_key:
                raise MddSyntaxError(lineno, "duplicate 'key=timestamp'")
            if in_header:
                raise MddSyntaxError(lineno, "key=timestamp is only valid on event fields")
            is_key = True
        else:
            if expect is not None:
                raise MddSyntaxError(lineno, "duplicate 'expect'")
            if not in_header:
                raise MddSyntaxError(lineno, "'expect' is only valid on header fields")
            text = mm.group(3)
            try:
                expect = text.encode("ascii")
            except UnicodeEncodeError:
                raise MddSyntaxError(lineno, "expect literal must be ASCII") from None
        pos = mm.end()
    if expect is not None and len(expect) != ftype.width:
        raise InvalidExpectWidth(name, ftype.width, len(expect))
    if is_meta and ftype.is_bytes:
        raise MddSyntaxError(lineno, f"meta field {name!r} must be numeric")
    if is_key and ftype.kind != "u64":
        raise MddSyntaxError(lineno, "key=timestamp requires type u64")
    if is_key and not is_meta:
        raise MddSyntaxError(lineno, "key=timestamp requires 'meta'")
    return FieldSpec(name=name, type=ftype, is_meta=is_meta, expect=expect,
                     is_timestamp_key=is_key)


def parse_mdd(text: str) -> MddSchema:
    """Parse MDD text into a validated schema.

    Deterministic, whole-input parse: comments and blank lines are ignored,
    every other line must belong to the fixed section sequence.
    """
    rows: list[tuple[int, int, str]] = []  # (lineno, indent, content)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).rstrip()
        if not line.strip():
            continue
        stripped = line.lstrip(" ")
        indent = len(line) - len(stripped)
        if "\t" in line[: indent + 1]:
            raise MddSyntaxError(lineno, "tabs are not allowed in indentation")
        if indent not in (0, 2):
            raise MddSyntaxError(lineno, f"indentation must be 0 or 2 spaces, got {indent}")
        rows.append((lineno, indent, stripped))

    pos = 0

    def need(description: str) -> tuple[int, int, str]:
        nonlocal pos
        if pos >= len(rows):
            last = rows[-1][0] if rows else 0
            raise MddSyntaxError(last + 1, f"unexpected end of input, expected {description}")
        row = rows[pos]
        pos += 1
        return row

    lineno, indent, content = need("'format <name>'")
    m = re.match(r"^format\s+(\S+)$", content)
    if indent != 0 or not m:
        raise MddSyntaxError(lineno, "expected 'format <name>'")
    format_name = m.group(1)
    if not _IDENT_RE.match(format_name):
        raise MddSyntaxError(lineno, f"invalid format name {format_name!r}")

    lineno, indent, content = need("'endian little'")
    m = re.match(r"^endian\s+(\S+)$", content)
    if indent != 0 or not m:
        raise MddSyntaxError(lineno, "expected 'endian little'")
    if m.group(1) != "little":
        raise UnsupportedEndianness(m.group(1))

    lineno, indent, content = need("'header:'")
    if indent != 0 or content != "header:":
        raise MddSyntaxError(lineno, "expected 'header:'")

    def collect_fields(in_header: bool) -> tuple[FieldSpec, ...]:
        nonlocal pos
        fields: list[FieldSpec] = []
        names: set[str] = set()
        while pos < len(rows) and rows[pos][1] == 2:
            lineno, _, content = rows[pos]
            pos += 1
            f = _parse_field(content, lineno, in_header=in_header)
            if f.name in names:
                raise DuplicateFieldName(f.name, lineno)
            names.add(f.name)
            fields.append(f)
        return tuple(fields)

    header_fields = collect_fields(in_header=True)
    if not header_fields:
        raise MddSyntaxError(lineno, "header declares no fields")

    lineno, indent, content = need("'events repeat header.<name>:'")
    m = re.match(r"^events\s+repeat\s+header\.([a-z_][a-z0-9_]*):$", content)
    if indent != 0 or not m:
        raise MddSyntaxError(lineno, "expected 'events repeat header.<name>:'")
    repeat_ref = m.group(1)
    events_line = lineno

    event_fields = collect_fields(in_header=False)
    if not event_fields:
        raise MddSyntaxError(events_line, "events section declares no fields")
    if pos < len(rows):
        raise MddSyntaxError(rows[pos][0], f"unexpected content {rows[pos][2]!r}")

    if repeat_ref not in {f.name for f in header_fields}:
        raise UnknownRepeatRef(repeat_ref)
    ref_field = next(f for f in header_fields if f.name == repeat_ref)
    if ref_field.type.kind not in _REPEAT_KINDS:
        raise MddSyntaxError(
            events_line, f"repeat field {repeat_ref!r} must be one of {_REPEAT_KINDS}"
        )
    keys = [f.name for f in event_fields if f.is_timestamp_key]
    if not keys:
        raise MissingTimestampKey()
    if len(keys) > 1:
        raise MultipleTimestampKeys(keys)

    schema = MddSchema(
        format_name=format_name,
        endianness="little",
        header_fields=header_fields,
        event_fields=event_fields,
        repeat_ref=repeat_ref,
    )
    schema.validate()
    return schema
