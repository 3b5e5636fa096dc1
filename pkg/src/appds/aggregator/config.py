"""Service configuration for the aggregator.

JSON file, pointed at by the APPDS_CONFIG environment variable (a --config
flag overrides it). Relative paths inside the file resolve against the
file's own directory.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path

from ..catalogue import DEFAULT_CHUNK_DURATION_NS

CONFIG_ENV_VAR = "APPDS_CONFIG"
DEFAULT_CACHE_BUDGET = 256 * 1024 * 1024


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class SourceConfig:
    source_id: int
    source_name: str
    adapter_url: str
    mdd_path: Path

    def to_json(self) -> dict:
        return {
            "source_id": self.source_id,
            "source_name": self.source_name,
            "adapter_url": self.adapter_url,
            "mdd_path": str(self.mdd_path),
        }


@dataclass(frozen=True)
class ServiceConfig:
    chunk_duration_ns: int
    log_path: Path
    cache_budget_bytes: int
    sources: tuple[SourceConfig, ...]

    @property
    def manifests_dir(self) -> Path:
        return self.log_path.parent / "manifests"

    def source(self, name: str) -> SourceConfig:
        for s in self.sources:
            if s.source_name == name:
                return s
        raise ConfigError(f"no source named {name!r} in configuration")


def load_config(path: str | Path) -> ServiceConfig:
    path = Path(path)
    try:
        obj = json.loads(path.read_text())
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    except ValueError as e:
        raise ConfigError(f"config {path} is not valid JSON: {e}") from e

    base = path.parent

    def respath(value: str) -> Path:
        p = Path(value)
        return p if p.is_absolute() else base / p

    try:
        sources = []
        for s in obj.get("sources", []):
            sources.append(SourceConfig(
                source_id=int(s["source_id"]),
                source_name=str(s["source_name"]),
                adapter_url=str(s["adapter_url"]),
                mdd_path=respath(s["mdd_path"]),
            ))
        cfg = ServiceConfig(
            chunk_duration_ns=int(obj.get("chunk_duration_ns", DEFAULT_CHUNK_DURATION_NS)),
            log_path=respath(obj["log_path"]),
            cache_budget_bytes=int(obj.get("cache_budget_bytes", DEFAULT_CACHE_BUDGET)),
            sources=tuple(sources),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"config {path} is malformed: {e}") from e

    ids = [s.source_id for s in cfg.sources]
    names = [s.source_name for s in cfg.sources]
    if len(set(ids)) != len(ids):
        raise ConfigError("source_id values must be unique")
    if len(set(names)) != len(names):
        raise ConfigError("source_name values must be unique")
    if cfg.chunk_duration_ns <= 0:
        raise ConfigError("chunk_duration_ns must be positive")
    return cfg


def resolve_config_path(cli_value: str | None) -> Path:
    if cli_value:
        return Path(cli_value)
    env = os.environ.get(CONFIG_ENV_VAR)
    if env:
        return Path(env)
    raise ConfigError(f"no config given: pass --config or set {CONFIG_ENV_VAR}")
