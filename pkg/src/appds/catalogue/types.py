"""Query model and error types of the metadata catalogue."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

from ..extractor import AttrValue

__all__ = [
    "Predicate",
    "TimeRange",
    "Query",
    "EventRef",
    "IngestReceipt",
    "CatalogueError",
    "InvalidQuery",
    "InconsistentBatch",
    "StorageFull",
    "CorruptLog",
    "OPS",
]

OPS = ("eq", "lt", "le", "gt", "ge", "between")


class CatalogueError(Exception):
    """Base class for catalogue failures."""


class InvalidQuery(CatalogueError):
    pass


class InconsistentBatch(CatalogueError):
    pass


class StorageFull(CatalogueError):
    pass


class CorruptLog(CatalogueError):
    def __init__(self, line: int, reason: str) -> None:
        super().__init__(f"corrupt log record at line {line}: {reason}")
        self.line = line
        self.reason = reason


@dataclass(frozen=True)
class Predicate:
    """One conjunct of a query: ``attr <op> lo`` or ``attr between lo hi``."""

    attr: str
    op: str
    lo: float
    hi: float | None = None

    def validate(self) -> None:
        if not isinstance(self.attr, str) or not self.attr:
            raise InvalidQuery("predicate attr must be a non-empty string")
        if self.op not in OPS:
            raise InvalidQuery(f"unknown predicate op {self.op!r}")
        if self.op == "between":
            if self.hi is None:
                raise InvalidQuery("'between' requires both lo and hi")
            if self.lo > self.hi:
                raise InvalidQuery("'between' requires lo <= hi")
        elif self.hi is not None:
            raise InvalidQuery(f"op {self.op!r} takes a single operand")

    def matches(self, value: float) -> bool:
        if self.op == "eq":
            return value == self.lo
        if self.op == "lt":
            return value < self.lo
        if self.op == "le":
            return value <= self.lo
        if self.op == "gt":
            return value > self.lo
        if self.op == "ge":
            return value >= self.lo
        return self.lo <= value <= self.hi  # between

    def feasible_interval(self) -> tuple[float, float]:
        """Smallest closed interval containing every matching value."""
        inf = float("inf")
        if self.op == "eq":
            return (self.lo, self.lo)
        if self.op in ("lt", "le"):
            return (-inf, self.lo)
        if self.op in ("gt", "ge"):
            return (self.lo, inf)
        return (self.lo, self.hi)

    def prunes(self, mn: float, mx: float) -> bool:
        """True if no value in [mn, mx] can match (safe to skip the chunk)."""
        if self.op == "eq":
            return self.lo < mn or self.lo > mx
        if self.op == "lt":
            return mn >= self.lo
        if self.op == "le":
            return mn > self.lo
        if self.op == "gt":
            return mx <= self.lo
        if self.op == "ge":
            return mx < self.lo
        return mx < self.lo or mn > self.hi  # between


@dataclass(frozen=True)
class TimeRange:
    from_ns: int
    to_ns: int

    def validate(self) -> None:
        if self.from_ns < 0 or self.to_ns < 0:
            raise InvalidQuery("time range bounds must be non-negative")
        if self.from_ns > self.to_ns:
            raise InvalidQuery("time range requires from_ns <= to_ns")


@dataclass(frozen=True)
class Query:
    """A search request; predicates are a conjunction over attribute values.

    Attribute comparisons happen as f64. A predicate naming an attribute a
    row does not carry simply excludes that row, it is never an error.
    """

    level: str
    time_range: TimeRange | None = None
    predicates: tuple[Predicate, ...] = ()
    sources: frozenset[int] | None = None
    limit: int | None = None

    def validate(self, expect_level: str | None = None) -> None:
        if self.level not in ("file", "event"):
            raise InvalidQuery(f"level must be 'file' or 'event', got {self.level!r}")
        if expect_level is not None and self.level != expect_level:
            raise InvalidQuery(f"operation requires a {expect_level}-level query")
        if self.time_range is not None:
            self.time_range.validate()
        for p in self.predicates:
            p.validate()
        if self.sources is not None:
            for s in self.sources:
                if not 0 <= int(s) <= 0xFFFF:
                    raise InvalidQuery(f"source id {s} out of u16 range")
        if self.limit is not None and self.limit < 0:
            raise InvalidQuery("limit must be non-negative")


class EventRef(NamedTuple):
    """Pointer to one event: which file, where in it, and when.

    Field order doubles as the canonical result order, so plain tuple
    sorting is the (timestamp, source, path, index) order; sha256 can never
    act as a tie-break because (path, index) already identifies an event.
    """

    timestamp_ns: int
    source_id: int
    path: str
    event_index: int
    sha256: str

    @property
    def sort_key(self) -> tuple:
        return self[:4]


@dataclass(frozen=True)
class IngestReceipt:
    inserted: bool


def attrs_match(predicates, attrs: dict[str, AttrValue]) -> bool:
    """Conjunction over f64-compared attribute values; missing attr fails."""
    for p in predicates:
        value = attrs.get(p.attr)
        if value is None or not p.matches(value.as_float()):
            return False
    return True
