import json
from pathlib import Path

import pytest

import appds
from appds.adapter import AdapterServer, publish
from appds.aggregator import Aggregator, load_config
from appds.gen import GenSpec, generate_corpus
from appds.mdd import parse_mdd

FORMATS_DIR = Path(appds.__file__).parent / "formats"
TIME_START_NS = 1_600_000_000_000_000_000
TIME_STEP_NS = 18_000_000_000  # 18 s: a 200-event file spans one hour


@pytest.fixture(scope="session")
def dat1_schema():
    return parse_mdd((FORMATS_DIR / "dat1.mdd").read_text())


@pytest.fixture(scope="session")
def dst1_schema():
    return parse_mdd((FORMATS_DIR / "dst1.mdd").read_text())


def make_corpus(out_dir: Path, fmt: str, files: int, events: int, seed: int,
                source_id: int, time_start_ns: int = TIME_START_NS):
    spec = GenSpec(
        format=fmt, files=files, events_min=events, events_max=events,
        time_start_ns=time_start_ns, time_step_ns=TIME_STEP_NS,
        seed=seed, out_dir=out_dir, source_id=source_id,
    )
    return generate_corpus(spec)


class TwoSourceRig:
    """Two generated sources published behind live adapters, plus a config
    file for an aggregator over them. Used by aggregator, CLI and
    acceptance tests."""

    def __init__(self, base: Path, files_per_source: int, events_per_file: int,
                 cache_budget: int = 64 * 1024 * 1024,
                 chunk_duration_ns: int = 3_600_000_000_000):
        self.base = base
        self.gen = {}
        self.servers = []
        names = [(1, "alpha", 101), (2, "beta", 102)]
        sources = []
        for source_id, name, seed in names:
            tree = base / f"tree_{name}"
            self.gen[name] = make_corpus(tree, "dat1", files_per_source,
                                         events_per_file, seed, source_id)
            pub = base / f"pub_{name}"
            publish(tree, source_id, name, pub)
            server = AdapterServer.from_published(pub).start()
            self.servers.append(server)
            sources.append({
                "source_id": source_id,
                "source_name": name,
                "adapter_url": server.url,
                "mdd_path": str(FORMATS_DIR / "dat1.mdd"),
            })
        self.config_path = base / "config.json"
        self.data_dir = base / "data"
        self.config_path.write_text(json.dumps({
            "chunk_duration_ns": chunk_duration_ns,
            "log_path": str(self.data_dir / "catalogue.log"),
            "cache_budget_bytes": cache_budget,
            "sources": sources,
        }))
        self.config = load_config(self.config_path)

    @property
    def per_source_truth(self):
        return [("alpha", self.gen["alpha"].files), ("beta", self.gen["beta"].files)]

    def time_span(self):
        t0 = min(g.files[0].time_min_ns for g in self.gen.values())
        t1 = max(g.files[-1].time_max_ns for g in self.gen.values())
        return t0, t1

    def new_aggregator(self) -> Aggregator:
        return Aggregator(self.config)

    def stop(self):
        for server in self.servers:
            server.stop()


@pytest.fixture
def two_source_rig(tmp_path):
    rig = TwoSourceRig(tmp_path, files_per_source=4, events_per_file=60)
    yield rig
    rig.stop()
