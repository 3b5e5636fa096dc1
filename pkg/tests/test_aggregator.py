import hashlib
import json
import random

import pytest
import requests

import appds.extractor
from appds.aggregator import (
    AdapterUnreachable,
    Aggregator,
    AggregatorServer,
    ConfigError,
    SourceConfig,
    UnknownCollection,
    UnknownPath,
    canonicalize,
    collection_id,
    load_config,
    parse_query_json,
)
from appds.catalogue import InvalidQuery, Predicate, Query, TimeRange
from appds.extractor import extract
from appds.mdd import parse_mdd
from conftest import FORMATS_DIR
from oracle import corpus_from_gen, group_matches_by_file, random_query, scan_events, scan_files


# -- config -------------------------------------------------------------------

def test_config_loads_and_resolves_paths(two_source_rig):
    cfg = load_config(two_source_rig.config_path)
    assert len(cfg.sources) == 2
    assert cfg.source("alpha").source_id == 1
    assert cfg.log_path.is_absolute() or cfg.log_path.exists() is not None
    with pytest.raises(ConfigError):
        cfg.source("nope")


def test_config_rejects_duplicates(tmp_path):
    src = {"source_id": 1, "source_name": "a", "adapter_url": "http://x",
           "mdd_path": "m.mdd"}
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"log_path": "log", "sources": [src, src]}))
    with pytest.raises(ConfigError):
        load_config(path)


# -- canonical queries --------------------------------------------------------

def test_canonicalize_field_order_invariant():
    a = parse_query_json(json.loads(
        '{"level":"event","predicates":[{"attr":"energy_tev","op":"between","lo":1.5,"hi":3.5}]}'
    ))
    b = parse_query_json(json.loads(
        '{"predicates":[{"hi":3.5,"lo":1.5,"op":"between","attr":"energy_tev"}],"level":"event"}'
    ))
    assert canonicalize(a) == canonicalize(b)


def test_canonicalize_materializes_nulls():
    q = parse_query_json({"level": "file"})
    text = canonicalize(q)
    obj = json.loads(text)
    assert obj == {"level": "file", "limit": None, "predicates": [],
                   "sources": None, "time_range": None}
    assert " " not in text


def test_canonicalize_fixed_point():
    q = Query(level="event",
              time_range=TimeRange(5, 10),
              predicates=(Predicate("energy_tev", "ge", 2.0),
                          Predicate("n_hits", "between", 1.0, 9.0)),
              sources=frozenset({2, 1}), limit=7)
    text = canonicalize(q)
    assert canonicalize(parse_query_json(json.loads(text))) == text
    # numeric operands are normalized to floats
    assert '"lo":2.0' in text
    assert '"sources":[1,2]' in text


def test_collection_id_is_stable():
    text = canonicalize(Query(level="event"))
    assert collection_id(text, 5) == collection_id(text, 5)
    assert collection_id(text, 5) != collection_id(text, 6)
    assert len(collection_id(text, 5)) == 64


@pytest.mark.parametrize("bad", [
    "not an object",
    {"level": "neither"},
    {"level": "event", "time_range": {"from_ns": 10, "to_ns": 5}},
    {"level": "event", "predicates": [{"attr": "x", "op": "zz", "lo": 1}]},
    {"level": "event", "predicates": [{"attr": "x", "op": "between", "lo": 1}]},
    {"level": "event", "predicates": [{"attr": "x", "op": "between", "lo": 3, "hi": 1}]},
    {"level": "event", "limit": -2},
    {"level": "event", "sources": [70000]},
])
def test_parse_query_rejects(bad):
    with pytest.raises(InvalidQuery):
        parse_query_json(bad)


# -- ingestion ----------------------------------------------------------------

def test_ingest_source_totals_and_idempotence(two_source_rig):
    with two_source_rig.new_aggregator() as agg:
        r1 = agg.ingest_source("alpha")
        assert r1.files == 4
        assert r1.events == two_source_rig.gen["alpha"].total_events
        assert r1.skipped == 0 and not r1.errors
        r2 = agg.ingest_source("alpha")
        assert (r2.files, r2.events, r2.skipped) == (0, 0, 4)


def test_ingest_isolates_corrupt_files(tmp_path):
    from appds.adapter import AdapterServer, publish
    from conftest import make_corpus

    tree = tmp_path / "tree"
    make_corpus(tree, "dat1", files=3, events=10, seed=4, source_id=1)
    (tree / "run_000" / "broken.dat1").write_bytes(b"garbage bytes here")
    publish(tree, 1, "alpha", tmp_path / "pub")
    server = AdapterServer.from_published(tmp_path / "pub").start()
    try:
        cfg_path = tmp_path / "c.json"
        cfg_path.write_text(json.dumps({
            "log_path": str(tmp_path / "log"),
            "sources": [{"source_id": 1, "source_name": "alpha",
                         "adapter_url": server.url,
                         "mdd_path": str(FORMATS_DIR / "dat1.mdd")}],
        }))
        with Aggregator(load_config(cfg_path)) as agg:
            report = agg.ingest_source("alpha")
            assert report.files == 3
            assert report.skipped == 1
            assert report.errors[0]["path"] == "run_000/broken.dat1"
    finally:
        server.stop()


def test_ingest_unreachable_adapter(tmp_path):
    cfg_path = tmp_path / "c.json"
    cfg_path.write_text(json.dumps({
        "log_path": str(tmp_path / "log"),
        "sources": [{"source_id": 1, "source_name": "alpha",
                     "adapter_url": "http://127.0.0.1:1",
                     "mdd_path": str(FORMATS_DIR / "dat1.mdd")}],
    }))
    with Aggregator(load_config(cfg_path)) as agg:
        agg.clients["alpha"].timeout_s = 0.5
        with pytest.raises(AdapterUnreachable):
            agg.ingest_source("alpha")


# -- queries and manifests ----------------------------------------------------

@pytest.fixture
def ingested(two_source_rig):
    agg = two_source_rig.new_aggregator()
    agg.ingest_all()
    yield two_source_rig, agg
    agg.close()


def test_file_level_manifest_matches_oracle(ingested):
    rig, agg = ingested
    corpus = corpus_from_gen(rig.per_source_truth)
    q = Query(level="file", time_range=TimeRange(*rig.time_span()))
    manifest = agg.handle_query(q)
    expect = scan_files(corpus, q)
    assert [(e.source_name, e.path, e.sha256, e.size, e.event_count)
            for e in manifest.entries] == [
        (f.source_name, f"{f.source_name}/{f.path}", f.sha256, f.size, f.event_count)
        for f in expect
    ]
    assert manifest.level == "file"


def test_event_level_manifest_matches_oracle(ingested):
    rig, agg = ingested
    corpus = corpus_from_gen(rig.per_source_truth)
    q = Query(level="event",
              predicates=(Predicate("energy_tev", "between", 1.5, 3.5),))
    manifest = agg.handle_query(q)
    matches = scan_events(corpus, q)
    grouped = group_matches_by_file(matches)
    assert sum(e.event_count for e in manifest.entries) == len(matches)
    by_sha = {e.file_sha256: e for e in manifest.entries}
    assert set(by_sha) == set(grouped)
    for sha, indices in grouped.items():
        entry = by_sha[sha]
        assert list(entry.indices) == indices
        assert entry.size is None and entry.sha256 is None  # not materialized
    # entries sorted by (source_name, path)
    keys = [(e.source_name, e.path) for e in manifest.entries]
    assert keys == sorted(keys)


def test_empty_manifest_retrievable(ingested):
    _, agg = ingested
    q = Query(level="event", predicates=(Predicate("energy_tev", "gt", 1e9),))
    manifest = agg.handle_query(q)
    assert manifest.entries == []
    assert agg.get_collection(manifest.collection_id) is manifest


def test_same_query_reuses_collection(ingested):
    _, agg = ingested
    q = Query(level="event", predicates=(Predicate("quality", "eq", 1.0),))
    m1 = agg.handle_query(q)
    m2 = agg.handle_query(q)
    assert m1.collection_id == m2.collection_id
    assert m2 is m1
    # new ingest changes the generation, so the id must change
    agg.catalogue._state = agg.catalogue._state.__class__(
        files_by_sha=agg.catalogue._state.files_by_sha,
        files=agg.catalogue._state.files,
        chunks=agg.catalogue._state.chunks,
        generation=agg.catalogue._state.generation + 1,
    )
    assert agg.handle_query(q).collection_id != m1.collection_id


def test_handle_query_is_lazy(ingested):
    _, agg = ingested
    before = {name: c.cache.counters.bytes_fetched for name, c in agg.clients.items()}
    for level in ("file", "event"):
        agg.handle_query(Query(level=level))
    after = {name: c.cache.counters.bytes_fetched for name, c in agg.clients.items()}
    assert before == after


def test_get_collection_file_file_level(ingested):
    rig, agg = ingested
    q = Query(level="file", sources=frozenset({1}))
    manifest = agg.handle_query(q)
    entry = manifest.entries[0]
    data = agg.get_collection_file(manifest.collection_id, entry.path)
    assert hashlib.sha256(data).hexdigest() == entry.sha256
    assert len(data) == entry.size
    # structure preservation: stripping "<source>/" gives the catalog path
    assert entry.path == f"{entry.source_name}/{entry.orig_path}"
    original = (rig.base / "tree_alpha" / entry.orig_path).read_bytes()
    assert data == original


def test_get_collection_file_event_level(ingested, dat1_schema):
    rig, agg = ingested
    corpus = corpus_from_gen(rig.per_source_truth)
    q = Query(level="event",
              predicates=(Predicate("energy_tev", "between", 1.5, 3.5),))
    manifest = agg.handle_query(q)
    matches = scan_events(corpus, q)
    grouped = group_matches_by_file(matches)
    total = 0
    for entry in manifest.entries:
        data = agg.get_collection_file(manifest.collection_id, entry.path)
        fm, events = extract(data, dat1_schema, 0, entry.path)
        assert fm.event_count == entry.event_count == len(grouped[entry.file_sha256])
        assert [e.attrs["timestamp_ns"].value for e in events] == [
            m[0] for m in matches if m[4] == entry.file_sha256
        ]
        # first access fills in size/sha
        assert entry.size == len(data)
        assert entry.sha256 == hashlib.sha256(data).hexdigest()
        total += fm.event_count
    assert total == len(matches)


def test_event_materialization_synthesizes_once(ingested, monkeypatch):
    _, agg = ingested
    q = Query(level="event", predicates=(Predicate("quality", "eq", 2.0),))
    manifest = agg.handle_query(q)
    entry = manifest.entries[0]
    calls = []
    real = appds.aggregator.core.synthesize_subset

    def counting(*args, **kwargs):
        calls.append(1)
        return real(*args, **kwargs)

    monkeypatch.setattr(appds.aggregator.core, "synthesize_subset", counting)
    d1 = agg.get_collection_file(manifest.collection_id, entry.path)
    d2 = agg.get_collection_file(manifest.collection_id, entry.path)
    assert d1 == d2
    assert len(calls) == 1


def test_unknown_collection_and_path(ingested):
    _, agg = ingested
    with pytest.raises(UnknownCollection):
        agg.get_collection("0" * 64)
    manifest = agg.handle_query(Query(level="file"))
    with pytest.raises(UnknownPath):
        agg.get_collection_file(manifest.collection_id, "alpha/never/was.dat1")


def test_federation_union_across_sources(ingested):
    rig, agg = ingested
    corpus = corpus_from_gen(rig.per_source_truth)
    rng = random.Random(31)
    span = rig.time_span()
    for _ in range(40):
        q = random_query(rng, "event", span, [1, 2])
        got = [(r.timestamp_ns, r.source_id, r.path, r.event_index, r.sha256)
               for r in agg.catalogue.query_events(q)]
        assert got == scan_events(corpus, q)
        if q.limit is None:
            per_source = []
            for sid in (1, 2):
                qq = Query(level=q.level, time_range=q.time_range,
                           predicates=q.predicates,
                           sources=(q.sources or frozenset({1, 2})) & frozenset({sid}))
                per_source.extend(
                    (r.timestamp_ns, r.source_id, r.path, r.event_index, r.sha256)
                    for r in agg.catalogue.query_events(qq))
            assert sorted(per_source, key=lambda t: t[:4]) == got


# -- HTTP API -----------------------------------------------------------------

@pytest.fixture
def http_rig(ingested):
    rig, agg = ingested
    server = AggregatorServer(agg).start()
    yield rig, agg, server
    server.stop()


def test_http_query_collection_file_flow(http_rig):
    rig, agg, server = http_rig
    q = {"level": "event",
         "predicates": [{"attr": "energy_tev", "op": "between", "lo": 1.5, "hi": 3.5}]}
    resp = requests.post(server.url + "/api/v1/queries", json=q)
    assert resp.status_code == 201
    body = resp.json()
    cid = body["collection_id"]
    assert body["manifest_url"] == f"/api/v1/collections/{cid}"

    man = requests.get(server.url + body["manifest_url"])
    assert man.status_code == 200
    manifest = man.json()
    assert set(manifest) == {"collection_id", "level", "query", "created_at_ns",
                             "entries"}
    for e in manifest["entries"]:
        assert set(e) == {"source_name", "path", "event_count", "size", "sha256"}

    entry = manifest["entries"][0]
    data = requests.get(server.url + f"/api/v1/collections/{cid}/files/{entry['path']}")
    assert data.status_code == 200
    assert data.headers["Content-Type"] == "application/octet-stream"
    man2 = requests.get(server.url + body["manifest_url"]).json()
    assert man2["entries"][0]["size"] == len(data.content)
    assert man2["entries"][0]["sha256"] == hashlib.sha256(data.content).hexdigest()


def test_http_errors(http_rig):
    _, _, server = http_rig
    assert requests.post(server.url + "/api/v1/queries", data=b"{nope").status_code == 400
    assert requests.post(server.url + "/api/v1/queries",
                         json={"level": "x"}).status_code == 400
    assert requests.get(server.url + "/api/v1/collections/" + "0" * 64).status_code == 404
    assert requests.get(
        server.url + "/api/v1/collections/" + "0" * 64 + "/files/a/b").status_code == 404
    assert requests.get(server.url + "/ui/").status_code == 404  # no ui dir configured
    assert requests.get(server.url + "/api/v1/health").json() == {"status": "ok"}


def test_http_sources_stats(http_rig):
    rig, _, server = http_rig
    stats = requests.get(server.url + "/api/v1/sources").json()
    assert [s["source_name"] for s in stats] == ["alpha", "beta"]
    for s in stats:
        assert s["ingest"]["files"] == 4
        assert set(s["cache"]) == {"hits", "misses", "bytes_fetched", "evictions",
                                   "resident_bytes"}


def test_http_502_when_adapter_dies(http_rig):
    rig, agg, server = http_rig
    resp = requests.post(server.url + "/api/v1/queries", json={"level": "file"})
    cid = resp.json()["collection_id"]
    entry_path = requests.get(
        server.url + f"/api/v1/collections/{cid}").json()["entries"][0]["path"]
    for adapter in rig.servers:
        adapter.stop()
    for client in agg.clients.values():
        client.cache.clear()
        client.timeout_s = 0.5
        client._session.close()
        client._session = requests.Session()  # drop pooled keep-alive sockets
    data = requests.get(server.url + f"/api/v1/collections/{cid}/files/{entry_path}")
    assert data.status_code == 502
