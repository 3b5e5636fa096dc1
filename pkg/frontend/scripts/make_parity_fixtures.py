#!/usr/bin/env python3
"""Regenerate test/fixtures/parity.json.

Each case pairs a web-form state with the canonical query text and
collection ids the Python service derives for it; the vitest suite then
proves the TypeScript side produces the same bytes. Run from frontend/:

    python3 scripts/make_parity_fixtures.py
"""

import json
from pathlib import Path

from appds.aggregator import canonicalize, collection_id, parse_query_json

GENERATIONS = [0, 7, 100]

# (name, form state as the UI holds it, query JSON as the wire carries it)
CASES = [
    (
        "match-all file query from an empty form",
        {"level": "file", "timeEnabled": False, "timeFromIso": "", "timeToIso": "",
         "predicates": [], "sourcesEnabled": False, "selectedSources": [], "limit": ""},
        {"level": "file"},
    ),
    (
        "energy window",
        {"level": "event", "timeEnabled": False, "timeFromIso": "", "timeToIso": "",
         "predicates": [{"attr": "energy_tev", "op": "between", "lo": "1.5", "hi": "3.5"}],
         "sourcesEnabled": False, "selectedSources": [], "limit": ""},
        {"level": "event",
         "predicates": [{"attr": "energy_tev", "op": "between", "lo": 1.5, "hi": 3.5}]},
    ),
    (
        "integral operand becomes a float",
        {"level": "event", "timeEnabled": False, "timeFromIso": "", "timeToIso": "",
         "predicates": [{"attr": "quality", "op": "ge", "lo": "1", "hi": ""}],
         "sourcesEnabled": False, "selectedSources": [], "limit": ""},
        {"level": "event", "predicates": [{"attr": "quality", "op": "ge", "lo": 1}]},
    ),
    (
        "file query over a time window",
        {"level": "file", "timeEnabled": True,
         "timeFromIso": "2020-09-13T12:26:40.000000000Z",
         "timeToIso": "2020-09-14T00:00:00.000000000Z",
         "predicates": [], "sourcesEnabled": False, "selectedSources": [], "limit": ""},
        {"level": "file",
         "time_range": {"from_ns": 1600000000000000000, "to_ns": 1600041600000000000}},
    ),
    (
        "time window plus two conditions",
        {"level": "event", "timeEnabled": True,
         "timeFromIso": "2020-09-13T13:00:00.000000000Z",
         "timeToIso": "2020-09-13T15:30:00.500000000Z",
         "predicates": [
             {"attr": "energy_tev", "op": "between", "lo": "0.5", "hi": "20"},
             {"attr": "n_hits", "op": "gt", "lo": "250", "hi": ""}],
         "sourcesEnabled": False, "selectedSources": [], "limit": ""},
        {"level": "event",
         "time_range": {"from_ns": 1600002000000000000, "to_ns": 1600011000500000000},
         "predicates": [
             {"attr": "energy_tev", "op": "between", "lo": 0.5, "hi": 20},
             {"attr": "n_hits", "op": "gt", "lo": 250}]},
    ),
    (
        "single source",
        {"level": "event", "timeEnabled": False, "timeFromIso": "", "timeToIso": "",
         "predicates": [], "sourcesEnabled": True, "selectedSources": [1], "limit": ""},
        {"level": "event", "sources": [1]},
    ),
    (
        "two sources with a header condition",
        {"level": "file", "timeEnabled": False, "timeFromIso": "", "timeToIso": "",
         "predicates": [{"attr": "run_id", "op": "eq", "lo": "3", "hi": ""}],
         "sourcesEnabled": True, "selectedSources": [2, 1], "limit": ""},
        {"level": "file", "predicates": [{"attr": "run_id", "op": "eq", "lo": 3}],
         "sources": [2, 1]},
    ),
    (
        "limited result set",
        {"level": "event", "timeEnabled": False, "timeFromIso": "", "timeToIso": "",
         "predicates": [], "sourcesEnabled": False, "selectedSources": [],
         "limit": "100"},
        {"level": "event", "limit": 100},
    ),
    (
        "everything at once",
        {"level": "event", "timeEnabled": False, "timeFromIso": "", "timeToIso": "",
         "predicates": [{"attr": "zenith_deg", "op": "lt", "lo": "12.25", "hi": ""}],
         "sourcesEnabled": True, "selectedSources": [2], "limit": "7"},
        {"level": "event",
         "predicates": [{"attr": "zenith_deg", "op": "lt", "lo": 12.25}],
         "sources": [2], "limit": 7},
    ),
    (
        "nanosecond-precision window",
        {"level": "event", "timeEnabled": True,
         "timeFromIso": "2020-09-13T12:26:40.123456789Z",
         "timeToIso": "2020-09-13T12:26:41.000000001Z",
         "predicates": [{"attr": "energy_tev", "op": "le", "lo": "0.5", "hi": ""}],
         "sourcesEnabled": False, "selectedSources": [], "limit": ""},
        {"level": "event",
         "time_range": {"from_ns": 1600000000123456789, "to_ns": 1600000001000000001},
         "predicates": [{"attr": "energy_tev", "op": "le", "lo": 0.5}]},
    ),
]


def main():
    cases = []
    for name, form, query_json in CASES:
        q = parse_query_json(query_json)
        canonical = canonicalize(q)
        cases.append({
            "name": name,
            "form": form,
            "canonical": canonical,
            "ids": {str(g): collection_id(canonical, g) for g in GENERATIONS},
        })
    # a representative manifest for the tree-view tests, in the exact public shape
    manifest = {
        "collection_id": "ab" * 32,
        "level": "event",
        "query": json.loads(cases[1]["canonical"]),
        "created_at_ns": 1600000000000000000,
        "entries": [
            {"source_name": "alpha", "path": "alpha/run_000/dat1_0001.dat1",
             "event_count": 12, "size": None, "sha256": None},
            {"source_name": "alpha", "path": "alpha/run_000/dat1_0003.dat1",
             "event_count": 5, "size": 232, "sha256": "cd" * 32},
            {"source_name": "alpha", "path": "alpha/run_001/dat1_0010.dat1",
             "event_count": 40, "size": None, "sha256": None},
            {"source_name": "beta", "path": "beta/run_000/dst1_0000.dst1",
             "event_count": 3, "size": None, "sha256": None},
            {"source_name": "beta", "path": "beta/run_002/dst1_0021.dst1",
             "event_count": 9, "size": None, "sha256": None},
        ],
    }
    out = Path(__file__).parent.parent / "test" / "fixtures" / "parity.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(
        {"generations": GENERATIONS, "cases": cases, "sample_manifest": manifest},
        indent=2,
    ) + "\n")
    print(f"wrote {out} ({len(cases)} cases)")


if __name__ == "__main__":
    main()
