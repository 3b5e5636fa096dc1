"""Query wire format and canonicalization.

The canonical form fixes everything the JSON surface leaves open: keys are
sorted, whitespace dropped, absent optionals become explicit nulls, numeric
operands become floats and sources are deduplicated and sorted. Collection
ids hash this text, so canonicalize(parse(canonicalize(q))) must be a fixed
point.
"""

from __future__ import annotations

import hashlib
import json

from ..catalogue import InvalidQuery, Predicate, Query, TimeRange

_JSON_SEP = (",", ":")


def parse_query_json(obj) -> Query:
    """Build a Query from its wire JSON; raises InvalidQuery on bad shape."""
    if not isinstance(obj, dict):
        raise InvalidQuery("query must be a JSON object")
    level = obj.get("level")
    if level not in ("file", "event"):
        raise InvalidQuery(f"level must be 'file' or 'event', got {level!r}")

    time_range = None
    tr = obj.get("time_range")
    if tr is not None:
        if not isinstance(tr, dict):
            raise InvalidQuery("time_range must be an object or null")
        try:
            time_range = TimeRange(from_ns=int(tr["from_ns"]), to_ns=int(tr["to_ns"]))
        except (KeyError, TypeError, ValueError) as e:
            raise InvalidQuery(f"bad time_range: {e}") from e

    predicates = []
    for p in obj.get("predicates") or []:
        if not isinstance(p, dict):
            raise InvalidQuery("predicates must be objects")
        try:
            op = p["op"]
            hi = p.get("hi")
            predicates.append(Predicate(
                attr=p["attr"],
                op=op,
                lo=float(p["lo"]),
                hi=float(hi) if (op == "between" and hi is not None) else None,
            ))
        except (KeyError, TypeError, ValueError) as e:
            raise InvalidQuery(f"bad predicate: {e}") from e

    sources = obj.get("sources")
    if sources is not None:
        try:
            sources = frozenset(int(s) for s in sources)
        except (TypeError, ValueError) as e:
            raise InvalidQuery(f"bad sources: {e}") from e

    limit = obj.get("limit")
    if limit is not None:
        try:
            limit = int(limit)
        except (TypeError, ValueError) as e:
            raise InvalidQuery(f"bad limit: {e}") from e

    q = Query(level=level, time_range=time_range, predicates=tuple(predicates),
              sources=sources, limit=limit)
    q.validate()
    return q


def query_to_canonical_obj(q: Query) -> dict:
    q.validate()
    return {
        "level": q.level,
        "time_range": None if q.time_range is None else {
            "from_ns": int(q.time_range.from_ns),
            "to_ns": int(q.time_range.to_ns),
        },
        "predicates": [
            {
                "attr": p.attr,
                "op": p.op,
                "lo": float(p.lo),
                "hi": float(p.hi) if p.op == "between" else None,
            }
            for p in q.predicates
        ],
        "sources": None if q.sources is None else sorted(int(s) for s in q.sources),
        "limit": None if q.limit is None else int(q.limit),
    }


def canonicalize(q: Query) -> str:
    """Key-sorted, whitespace-free JSON with defaults materialized."""
    return json.dumps(query_to_canonical_obj(q), sort_keys=True, separators=_JSON_SEP)


def collection_id(canonical_query: str, generation: int) -> str:
    """Content-derived id: same query over an unchanged catalogue, same id."""
    payload = canonical_query.encode() + b":" + str(generation).encode()
    return hashlib.sha256(payload).hexdigest()
