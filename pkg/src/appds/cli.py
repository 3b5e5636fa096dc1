"""Operator command line: the whole workflow from one binary.

Machine-readable output (JSON) goes to stdout, diagnostics to stderr.
Exit codes: 0 success, 1 domain error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .adapter import AdapterServer, publish
from .aggregator import (
    Aggregator,
    AggregatorError,
    AggregatorServer,
    ConfigError,
    load_config,
    resolve_config_path,
)
from .catalogue import CatalogueError, InvalidQuery, Predicate, Query, TimeRange
from .extractor import ExtractError, extract
from .gen import GenSpec, generate_corpus, parse_events_arg
from .mdd import MddError, parse_mdd

DEFAULT_TIME_START_NS = 1_600_000_000_000_000_000
DEFAULT_TIME_STEP_NS = 18_000_000_000


class _PredicateFlag(argparse.Action):
    """Collects --attr/--eq/--lt/... flags in command-line order so each
    operator binds to the closest preceding --attr."""

    def __call__(self, parser, namespace, values, option_string=None):
        tokens = getattr(namespace, "pred_tokens", None)
        if tokens is None:
            tokens = []
            namespace.pred_tokens = tokens
        tokens.append((option_string.lstrip("-"), values))


def _build_predicates(tokens) -> tuple[Predicate, ...]:
    predicates = []
    attr = None
    for flag, values in tokens or []:
        if flag == "attr":
            if attr is not None:
                raise InvalidQuery(f"--attr {attr} is missing an operator flag")
            attr = values
        else:
            if attr is None:
                raise InvalidQuery(f"--{flag} must follow an --attr flag")
            if flag == "between":
                predicates.append(Predicate(attr, "between", float(values[0]),
                                            float(values[1])))
            else:
                predicates.append(Predicate(attr, flag, float(values)))
            attr = None
    if attr is not None:
        raise InvalidQuery(f"--attr {attr} is missing an operator flag")
    return tuple(predicates)


def _add_predicate_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--attr", action=_PredicateFlag, metavar="NAME",
                   help="attribute for the next operator flag (repeatable)")
    for op in ("eq", "lt", "le", "gt", "ge"):
        p.add_argument(f"--{op}", action=_PredicateFlag, type=float, metavar="X",
                       help=f"predicate: attr {op} X")
    p.add_argument("--between", action=_PredicateFlag, nargs=2, type=float,
                   metavar=("LO", "HI"), help="predicate: LO <= attr <= HI")


def _parse_listen(value: str) -> tuple[str, int]:
    host, _, port = value.rpartition(":")
    if not host or not port.isdigit():
        raise argparse.ArgumentTypeError(f"expected HOST:PORT, got {value!r}")
    return host, int(port)


def _emit(obj) -> None:
    json.dump(obj, sys.stdout, indent=2)
    sys.stdout.write("\n")


def _make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="appds", description=__doc__)
    parser.add_argument("--version", action="version", version=f"appds {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="debug logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic corpus")
    p.add_argument("--format", choices=("dat1", "dst1"), required=True)
    p.add_argument("--files", type=int, required=True)
    p.add_argument("--events", required=True, metavar="N|LO:HI",
                   help="events per file: fixed count or inclusive range")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--source-id", type=int, default=0)
    p.add_argument("--time-start", type=int, default=DEFAULT_TIME_START_NS,
                   metavar="NS")
    p.add_argument("--time-step", type=int, default=DEFAULT_TIME_STEP_NS,
                   metavar="NS")

    p = sub.add_parser("publish", help="snapshot a directory into catalog + objects")
    p.add_argument("--root", required=True)
    p.add_argument("--source-id", type=int, required=True)
    p.add_argument("--source-name", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("serve-adapter", help="serve a published snapshot over HTTP")
    p.add_argument("--published", required=True)
    p.add_argument("--listen", type=_parse_listen, default=("127.0.0.1", 8081),
                   metavar="HOST:PORT")

    p = sub.add_parser("serve-aggregator", help="run the aggregation service")
    p.add_argument("--config")
    p.add_argument("--listen", type=_parse_listen, default=("127.0.0.1", 8080),
                   metavar="HOST:PORT")
    p.add_argument("--ui-dir", help="directory with the built web interface")

    p = sub.add_parser("ingest", help="pull sources through the extractor into the catalogue")
    p.add_argument("--config")
    p.add_argument("--source", help="only this source name (default: all)")

    p = sub.add_parser("query", help="run a query and print its collection manifest")
    p.add_argument("--config")
    p.add_argument("--level", choices=("file", "event"), required=True)
    p.add_argument("--from", dest="from_ns", type=int, metavar="NS")
    p.add_argument("--to", dest="to_ns", type=int, metavar="NS")
    p.add_argument("--source-id", type=int, action="append", metavar="N")
    p.add_argument("--limit", type=int)
    _add_predicate_flags(p)

    p = sub.add_parser("fetch", help="materialize one collection entry to a file")
    p.add_argument("--config")
    p.add_argument("--collection", required=True, metavar="ID")
    p.add_argument("--path", required=True, metavar="ENTRY_PATH")
    p.add_argument("--out", required=True, metavar="FILE")

    p = sub.add_parser("extract", help="extract metadata from one file (no catalogue)")
    p.add_argument("--mdd", required=True)
    p.add_argument("--in", dest="input", required=True, metavar="FILE")
    p.add_argument("--source-id", type=int, default=0)

    return parser


def _cmd_gen(args) -> int:
    lo, hi = parse_events_arg(args.events)
    spec = GenSpec(
        format=args.format, files=args.files, events_min=lo, events_max=hi,
        time_start_ns=args.time_start, time_step_ns=args.time_step,
        seed=args.seed, out_dir=Path(args.out), source_id=args.source_id,
    )
    result = generate_corpus(spec)
    _emit({
        "out_dir": str(spec.out_dir),
        "format": spec.format,
        "files": len(result.files),
        "events": result.total_events,
        "time_min_ns": result.files[0].time_min_ns if result.files else None,
        "time_max_ns": result.files[-1].time_max_ns if result.files else None,
    })
    return 0


def _cmd_publish(args) -> int:
    catalog, _store, report = publish(args.root, args.source_id,
                                      args.source_name, args.out)
    _emit({
        "out_dir": args.out,
        "source_id": catalog.source_id,
        "source_name": catalog.source_name,
        "generated_at_ns": catalog.generated_at_ns,
        **report.to_json(),
    })
    return 0


def _cmd_serve_adapter(args) -> int:
    host, port = args.listen
    server = AdapterServer.from_published(args.published, host=host, port=port)
    print(f"adapter serving {args.published} on {server.url}", file=sys.stderr)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    return 0


def _cmd_serve_aggregator(args) -> int:
    config = load_config(resolve_config_path(args.config))
    host, port = args.listen
    with Aggregator(config) as agg:
        server = AggregatorServer(agg, host=host, port=port, ui_dir=args.ui_dir)
        print(f"aggregator serving on {server.url}", file=sys.stderr)
        try:
            server.serve_forever()
        except KeyboardInterrupt:
            pass
    return 0


def _cmd_ingest(args) -> int:
    config = load_config(resolve_config_path(args.config))
    with Aggregator(config) as agg:
        if args.source:
            reports = [agg.ingest_source(args.source)]
        else:
            reports = agg.ingest_all()
    _emit([r.to_json() for r in reports])
    return 0


def _cmd_query(args) -> int:
    config = load_config(resolve_config_path(args.config))
    time_range = None
    if (args.from_ns is None) != (args.to_ns is None):
        raise InvalidQuery("--from and --to must be given together")
    if args.from_ns is not None:
        time_range = TimeRange(args.from_ns, args.to_ns)
    q = Query(
        level=args.level,
        time_range=time_range,
        predicates=_build_predicates(getattr(args, "pred_tokens", None)),
        sources=frozenset(args.source_id) if args.source_id else None,
        limit=args.limit,
    )
    with Aggregator(config) as agg:
        manifest = agg.handle_query(q)
    _emit(manifest.to_public_json())
    return 0


def _cmd_fetch(args) -> int:
    config = load_config(resolve_config_path(args.config))
    with Aggregator(config) as agg:
        data = agg.get_collection_file(args.collection, args.path)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    Path(args.out).write_bytes(data)
    _emit({"collection_id": args.collection, "path": args.path,
           "out": args.out, "size": len(data)})
    return 0


def _cmd_extract(args) -> int:
    schema = parse_mdd(Path(args.mdd).read_text())
    data = Path(args.input).read_bytes()
    fm, events = extract(data, schema, args.source_id, Path(args.input).name)
    _emit({
        "file": fm.to_json(),
        "events": [
            {"idx": ev.event_index, "ts": ev.timestamp_ns,
             "attrs": {k: v.to_json() for k, v in ev.attrs.items()}}
            for ev in events
        ],
    })
    return 0


_COMMANDS = {
    "gen": _cmd_gen,
    "publish": _cmd_publish,
    "serve-adapter": _cmd_serve_adapter,
    "serve-aggregator": _cmd_serve_aggregator,
    "ingest": _cmd_ingest,
    "query": _cmd_query,
    "fetch": _cmd_fetch,
    "extract": _cmd_extract,
}


def main(argv: list[str] | None = None) -> int:
    args = _make_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return _COMMANDS[args.command](args)
    except (MddError, ExtractError, CatalogueError, AggregatorError,
            ConfigError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
