from .store import Catalogue, CatalogueState, Chunk, DEFAULT_CHUNK_DURATION_NS
from .types import (
    CatalogueError,
    CorruptLog,
    EventRef,
    InconsistentBatch,
    IngestReceipt,
    InvalidQuery,
    Predicate,
    Query,
    StorageFull,
    TimeRange,
    attrs_match,
)

__all__ = [
    "Catalogue",
    "CatalogueState",
    "Chunk",
    "DEFAULT_CHUNK_DURATION_NS",
    "CatalogueError",
    "CorruptLog",
    "EventRef",
    "InconsistentBatch",
    "IngestReceipt",
    "InvalidQuery",
    "Predicate",
    "Query",
    "StorageFull",
    "TimeRange",
    "attrs_match",
]
