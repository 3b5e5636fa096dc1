"""Deterministic synthetic corpora in the DAT1/DST1 layouts.

The writer packs bytes by hand from the layout tables; it shares no code
with the schema-driven extractor, so generated values double as an
independent ground truth in tests. Same spec + seed => byte-identical
trees.

Value distributions (all from one seeded PRNG):
    energy_tev   log-uniform in [0.1, 100]
    zenith_deg   uniform [0, 40]
    azimuth_deg  uniform [0, 360)
    n_hits       uniform integer [1, 400]
    quality      uniform integer [0, 3]
    core_x_m/core_y_m  uniform [-500, 500]     (DST1)
    chi2         uniform [0, 10]               (DST1)
    n_stations   uniform integer [1, 50]       (DST1)

Timestamps are arithmetic: a global cursor advances by time_step_ns per
event, so file k starts right after file k-1 ends.
"""

from __future__ import annotations

import hashlib
import random
import struct
from dataclasses import dataclass, field
from pathlib import Path

FORMATS = ("dat1", "dst1")
FILES_PER_RUN = 10

_HEADER_FMT = "<4sHHII16s"
_DAT1_RECORD_FMT = "<QdffIB11s"
_DST1_RECORD_FMT = "<QdffffIB11s"
_PAD11 = b"\x00" * 11


@dataclass(frozen=True)
class GenSpec:
    format: str
    files: int
    events_min: int
    events_max: int
    time_start_ns: int
    time_step_ns: int
    seed: int
    out_dir: Path
    source_id: int = 0

    def __post_init__(self):
        if self.format not in FORMATS:
            raise ValueError(f"unknown format {self.format!r}")
        if self.events_min > self.events_max or self.events_min < 0:
            raise ValueError("bad events range")


@dataclass
class GeneratedFile:
    path: str                      # relative to out_dir
    sha256: str
    size: int
    source_id: int
    run_id: int
    event_count: int
    events: list[dict]             # ground truth: name -> python value

    @property
    def time_min_ns(self) -> int | None:
        return self.events[0]["timestamp_ns"] if self.events else None

    @property
    def time_max_ns(self) -> int | None:
        return self.events[-1]["timestamp_ns"] if self.events else None


@dataclass
class GenResult:
    spec: GenSpec
    files: list[GeneratedFile] = field(default_factory=list)

    @property
    def total_events(self) -> int:
        return sum(f.event_count for f in self.files)


def _f32(value: float) -> float:
    # Exact value after the f32 round trip the file format imposes.
    return struct.unpack("<f", struct.pack("<f", value))[0]


def _gen_event(rng: random.Random, fmt: str, ts: int) -> tuple[bytes, dict]:
    energy = 10.0 ** rng.uniform(-1.0, 2.0)
    zenith = rng.uniform(0.0, 40.0)
    quality = rng.randint(0, 3)
    if fmt == "dat1":
        azimuth = rng.uniform(0.0, 360.0)
        n_hits = rng.randint(1, 400)
        raw = struct.pack(_DAT1_RECORD_FMT, ts, energy, zenith, azimuth,
                          n_hits, quality, _PAD11)
        truth = {
            "timestamp_ns": ts,
            "energy_tev": energy,
            "zenith_deg": _f32(zenith),
            "n_hits": n_hits,
            "quality": quality,
        }
    else:
        core_x = rng.uniform(-500.0, 500.0)
        core_y = rng.uniform(-500.0, 500.0)
        chi2 = rng.uniform(0.0, 10.0)
        n_stations = rng.randint(1, 50)
        raw = struct.pack(_DST1_RECORD_FMT, ts, energy, core_x, core_y,
                          zenith, chi2, n_stations, quality, _PAD11)
        truth = {
            "timestamp_ns": ts,
            "energy_tev": energy,
            "core_x_m": _f32(core_x),
            "core_y_m": _f32(core_y),
            "zenith_deg": _f32(zenith),
            "chi2": _f32(chi2),
            "n_stations": n_stations,
            "quality": quality,
        }
    return raw, truth


def generate_corpus(spec: GenSpec) -> GenResult:
    """Write the tree under spec.out_dir and return the generated truth."""
    rng = random.Random(spec.seed)
    out = Path(spec.out_dir)
    result = GenResult(spec=spec)
    magic = spec.format.upper().encode("ascii")
    cursor = spec.time_start_ns

    for i in range(spec.files):
        run_id = i // FILES_PER_RUN
        rel = f"run_{run_id:03d}/{spec.format}_{i:04d}.{spec.format}"
        n_events = (spec.events_min if spec.events_min == spec.events_max
                    else rng.randint(spec.events_min, spec.events_max))
        header = struct.pack(_HEADER_FMT, magic, 1, spec.source_id, run_id,
                             n_events, b"\x00" * 16)
        records = []
        truths = []
        for _ in range(n_events):
            raw, truth = _gen_event(rng, spec.format, cursor)
            cursor += spec.time_step_ns
            records.append(raw)
            truths.append(truth)
        data = header + b"".join(records)

        target = out / rel
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_bytes(data)
        result.files.append(GeneratedFile(
            path=rel,
            sha256=hashlib.sha256(data).hexdigest(),
            size=len(data),
            source_id=spec.source_id,
            run_id=run_id,
            event_count=n_events,
            events=truths,
        ))
    return result


def parse_events_arg(value: str) -> tuple[int, int]:
    """'200' -> (200, 200); '100:300' -> (100, 300) inclusive."""
    if ":" in value:
        lo, hi = value.split(":", 1)
        return int(lo), int(hi)
    n = int(value)
    return n, n


def tree_digest(root: str | Path) -> str:
    """Order-independent fingerprint of a tree: paths, sizes and contents."""
    root = Path(root)
    h = hashlib.sha256()
    for p in sorted(root.rglob("*"), key=lambda p: p.as_posix()):
        if p.is_file():
            h.update(p.relative_to(root).as_posix().encode())
            h.update(str(p.stat().st_size).encode())
            h.update(hashlib.sha256(p.read_bytes()).digest())
    return h.hexdigest()
