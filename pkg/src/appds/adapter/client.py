"""Caching fetch client for adapter object services.

Every object fetched over the wire is re-hashed before use, so a corrupt
or hostile adapter can never poison the cache. Residency is bounded by a
byte budget with least-recently-used eviction.
"""

from __future__ import annotations

import hashlib
import json
import threading
from collections import OrderedDict
from dataclasses import dataclass

import requests

from .publish import ContentCatalog


class AdapterClientError(Exception):
    pass


class NotFound(AdapterClientError):
    def __init__(self, sha256: str) -> None:
        super().__init__(f"object {sha256} not found on adapter")
        self.sha256 = sha256


class DigestMismatch(AdapterClientError):
    def __init__(self, expected: str, actual: str) -> None:
        super().__init__(f"object digest mismatch: wanted {expected}, got {actual}")
        self.expected = expected
        self.actual = actual


class Unreachable(AdapterClientError):
    def __init__(self, url: str, cause: Exception) -> None:
        super().__init__(f"adapter {url} unreachable: {cause}")
        self.url = url


@dataclass
class CacheCounters:
    hits: int = 0
    misses: int = 0
    bytes_fetched: int = 0
    evictions: int = 0

    def to_json(self) -> dict:
        return {"hits": self.hits, "misses": self.misses,
                "bytes_fetched": self.bytes_fetched, "evictions": self.evictions}


class LruByteCache:
    """sha256 -> bytes map bounded by a byte budget, LRU eviction."""

    def __init__(self, budget_bytes: int) -> None:
        self.budget_bytes = budget_bytes
        self._entries: OrderedDict[str, bytes] = OrderedDict()
        self._resident_bytes = 0
        self._lock = threading.Lock()
        self.counters = CacheCounters()

    @property
    def resident_bytes(self) -> int:
        return self._resident_bytes

    def get(self, key: str) -> bytes | None:
        with self._lock:
            data = self._entries.get(key)
            if data is None:
                return None
            self._entries.move_to_end(key)
            return data

    def put(self, key: str, data: bytes) -> None:
        if len(data) > self.budget_bytes:
            return  # larger than the whole budget: serve uncached
        with self._lock:
            if key in self._entries:
                self._entries.move_to_end(key)
                return
            while self._resident_bytes + len(data) > self.budget_bytes and self._entries:
                _, evicted = self._entries.popitem(last=False)
                self._resident_bytes -= len(evicted)
                self.counters.evictions += 1
            self._entries[key] = data
            self._resident_bytes += len(data)

    def clear(self) -> None:
        with self._lock:
            self._entries.clear()
            self._resident_bytes = 0

    def __contains__(self, key: str) -> bool:
        with self._lock:
            return key in self._entries


class AdapterClient:
    """HTTP client for one adapter, with digest verification and caching.

    Concurrent fetches of the same object are collapsed: only one request
    goes on the wire, the rest wait for the cache to fill.
    """

    def __init__(self, base_url: str, cache_budget_bytes: int,
                 timeout_s: float = 10.0) -> None:
        self.base_url = base_url.rstrip("/")
        self.cache = LruByteCache(cache_budget_bytes)
        self.timeout_s = timeout_s
        self._session = requests.Session()
        self._inflight: dict[str, threading.Event] = {}
        self._inflight_lock = threading.Lock()

    def get_catalog(self) -> ContentCatalog:
        url = f"{self.base_url}/api/v1/catalog"
        try:
            resp = self._session.get(url, timeout=self.timeout_s)
        except requests.RequestException as e:
            raise Unreachable(self.base_url, e) from e
        if resp.status_code != 200:
            raise AdapterClientError(f"catalog request failed: HTTP {resp.status_code}")
        return ContentCatalog.from_json(json.loads(resp.content))

    def fetch(self, sha256: str) -> bytes:
        """Verified object bytes; network traffic only on cache misses."""
        counters = self.cache.counters
        while True:
            data = self.cache.get(sha256)
            if data is not None:
                counters.hits += 1
                return data
            with self._inflight_lock:
                event = self._inflight.get(sha256)
                if event is None:
                    self._inflight[sha256] = threading.Event()
                    break
            event.wait(timeout=self.timeout_s * 2)
            # Either cached now, or the fetcher failed; loop and retry.

        try:
            data = self._fetch_remote(sha256)
            self.cache.put(sha256, data)
            return data
        finally:
            with self._inflight_lock:
                self._inflight.pop(sha256).set()

    def _fetch_remote(self, sha256: str) -> bytes:
        counters = self.cache.counters
        url = f"{self.base_url}/api/v1/objects/{sha256}"
        try:
            resp = self._session.get(url, timeout=self.timeout_s)
        except requests.RequestException as e:
            raise Unreachable(self.base_url, e) from e
        if resp.status_code == 404:
            counters.misses += 1
            raise NotFound(sha256)
        if resp.status_code != 200:
            raise AdapterClientError(f"object request failed: HTTP {resp.status_code}")
        data = resp.content
        counters.misses += 1
        counters.bytes_fetched += len(data)
        actual = hashlib.sha256(data).hexdigest()
        if actual != sha256:
            raise DigestMismatch(sha256, actual)
        return data

    def health(self) -> bool:
        try:
            resp = self._session.get(f"{self.base_url}/api/v1/health",
                                     timeout=self.timeout_s)
            return resp.status_code == 200
        except requests.RequestException:
            return False

    def close(self) -> None:
        self._session.close()
