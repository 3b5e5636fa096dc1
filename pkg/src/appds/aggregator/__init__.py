from .canon import canonicalize, collection_id, parse_query_json, query_to_canonical_obj
from .config import (
    CONFIG_ENV_VAR,
    ConfigError,
    ServiceConfig,
    SourceConfig,
    load_config,
    resolve_config_path,
)
from .core import (
    AdapterUnreachable,
    Aggregator,
    AggregatorError,
    IngestionReport,
    UnknownCollection,
    UnknownPath,
)
from .manifests import CollectionManifest, ManifestEntry, ManifestStore
from .server import AggregatorServer

__all__ = [
    "canonicalize",
    "collection_id",
    "parse_query_json",
    "query_to_canonical_obj",
    "CONFIG_ENV_VAR",
    "ConfigError",
    "ServiceConfig",
    "SourceConfig",
    "load_config",
    "resolve_config_path",
    "AdapterUnreachable",
    "Aggregator",
    "AggregatorError",
    "IngestionReport",
    "UnknownCollection",
    "UnknownPath",
    "CollectionManifest",
    "ManifestEntry",
    "ManifestStore",
    "AggregatorServer",
]
