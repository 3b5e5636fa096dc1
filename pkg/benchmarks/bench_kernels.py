#!/usr/bin/env python3
"""Compare the numba and numpy scan-kernel backends.

Times the raw row-filter kernels on synthetic columns and then a full
event-query workload over an in-memory catalogue with each backend active.

    python3 benchmarks/bench_kernels.py [--rows 1000000] [--queries 200]
"""

import argparse
import random
import time

import numpy as np

from appds.catalogue import Catalogue, Predicate, Query, TimeRange, kernels
from appds.extractor import AttrValue, EventMetadata, FileMetadata

HOUR = 3_600_000_000_000


def timeit(fn, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def bench_micro(rows: int):
    rng = np.random.default_rng(1)
    values = rng.uniform(0, 100, size=rows)
    values[::11] = np.nan
    ts = rng.integers(0, 10**15, size=rows, dtype=np.uint64)

    backends = {"numpy": kernels.NUMPY_BACKEND}
    if kernels.NUMBA_BACKEND is not None:
        backends["numba"] = kernels.NUMBA_BACKEND
        # warm up the jit before timing
        kernels.NUMBA_BACKEND["cmp_mask"](values[:16], 5, 1.0, 2.0)
        kernels.NUMBA_BACKEND["time_mask"](ts[:16], np.uint64(0), np.uint64(1))
        kernels.NUMBA_BACKEND["minmax"](values[:16])

    print(f"\nkernel microbenchmarks ({rows:,} rows, best of 5)")
    print(f"{'kernel':<12}" + "".join(f"{name:>12}" for name in backends))
    rows_out = {
        "cmp between": {n: timeit(lambda b=b: b["cmp_mask"](values, kernels.OP_BETWEEN, 25.0, 75.0))
                        for n, b in backends.items()},
        "cmp ge": {n: timeit(lambda b=b: b["cmp_mask"](values, kernels.OP_GE, 50.0, 0.0))
                   for n, b in backends.items()},
        "time mask": {n: timeit(lambda b=b: b["time_mask"](ts, np.uint64(10**14), np.uint64(9 * 10**14)))
                      for n, b in backends.items()},
        "minmax": {n: timeit(lambda b=b: b["minmax"](values))
                   for n, b in backends.items()},
    }
    for label, results in rows_out.items():
        print(f"{label:<12}" + "".join(f"{results[n]*1e3:>10.2f}ms" for n in backends))


def build_catalogue(n_files=50, events_per_file=400) -> tuple[Catalogue, int]:
    rng = random.Random(7)
    cat = Catalogue(chunk_duration_ns=HOUR)
    ts = 0
    for k in range(n_files):
        ts_list = []
        events = []
        sha = f"{k:064x}"
        for i in range(events_per_file):
            ts += HOUR // events_per_file
            ts_list.append(ts)
            events.append(EventMetadata(
                sha256=sha, event_index=i, timestamp_ns=ts,
                attrs={
                    "timestamp_ns": AttrValue("u", ts),
                    "energy_tev": AttrValue("f", 10 ** rng.uniform(-1, 2)),
                    "zenith_deg": AttrValue("f", rng.uniform(0, 40)),
                    "n_hits": AttrValue("u", rng.randint(1, 400)),
                    "quality": AttrValue("u", rng.randint(0, 3)),
                },
            ))
        fm = FileMetadata(
            source_id=1, path=f"f{k}", size=0, sha256=sha, format_name="dat1",
            event_count=events_per_file, time_min_ns=ts_list[0],
            time_max_ns=ts_list[-1], header_attrs={},
        )
        cat.ingest(fm, events)
    return cat, ts


def bench_queries(n_queries: int):
    cat, span = build_catalogue()
    rng = random.Random(3)
    queries = []
    for _ in range(n_queries):
        predicates = [Predicate("energy_tev", "between",
                                a := rng.uniform(0.1, 50), a + rng.uniform(0, 20))]
        if rng.random() < 0.5:
            predicates.append(Predicate("n_hits", "ge", float(rng.randint(0, 300))))
        time_range = None
        if rng.random() < 0.5:
            a = rng.randrange(0, span)
            time_range = TimeRange(a, a + rng.randrange(0, span // 4))
        queries.append(Query(level="event", time_range=time_range,
                             predicates=tuple(predicates)))

    names = ["numpy"] + (["numba"] if kernels.NUMBA_BACKEND is not None else [])
    print(f"\nfull event-query workload ({n_queries} queries, "
          f"{cat.event_count:,} rows, best of 3)")
    for name in names:
        kernels.set_backend(name)
        for q in queries[:5]:
            cat.query_events(q)  # warm up (jit + caches)
        best = timeit(lambda: [cat.query_events(q) for q in queries], repeat=3)
        print(f"{name:>8}: {best:.3f}s total, {best / n_queries * 1e3:.2f} ms/query")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rows", type=int, default=1_000_000)
    parser.add_argument("--queries", type=int, default=200)
    args = parser.parse_args()
    print(f"active backend by default: {kernels.backend_name()} "
          f"(APPDS_NO_NUMBA={'set' if kernels.backend_name() == 'numpy' else 'unset'})")
    bench_micro(args.rows)
    bench_queries(args.queries)


if __name__ == "__main__":
    main()
