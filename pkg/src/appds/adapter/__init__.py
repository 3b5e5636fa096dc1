from .publish import (
    CATALOG_FILENAME,
    OBJECTS_DIRNAME,
    CatalogEntry,
    ContentCatalog,
    ObjectStore,
    PublishReport,
    load_published,
    publish,
)
from .client import (
    AdapterClient,
    AdapterClientError,
    CacheCounters,
    DigestMismatch,
    LruByteCache,
    NotFound,
    Unreachable,
)
from .server import AdapterServer

__all__ = [
    "CATALOG_FILENAME",
    "OBJECTS_DIRNAME",
    "CatalogEntry",
    "ContentCatalog",
    "ObjectStore",
    "PublishReport",
    "load_published",
    "publish",
    "AdapterClient",
    "AdapterClientError",
    "CacheCounters",
    "DigestMismatch",
    "LruByteCache",
    "NotFound",
    "Unreachable",
    "AdapterServer",
]
