"""appds: desk-scale distributed storage for event data.

Local storages stay untouched; read-only adapters export them as
content-addressed object services, schema-driven extractors lift metadata
into a time-chunked catalogue, and the aggregation service answers
file-level and event-level queries with lazily materialized collections.
"""

from .mdd import MddSchema, parse_mdd
from .extractor import extract, synthesize_subset, event_offset
from .catalogue import Catalogue, Predicate, Query, TimeRange

__version__ = "0.1.0"

__all__ = [
    "MddSchema",
    "parse_mdd",
    "extract",
    "synthesize_subset",
    "event_offset",
    "Catalogue",
    "Predicate",
    "Query",
    "TimeRange",
    "__version__",
]
