"""Service configuration: JSON file, environment overrides, defaults.

Every field can be overridden by a MAPTAG_* environment variable, which
wins over the file value. Fixture provider mode is the default so a fresh
checkout runs fully offline.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ValidationError

ENV_PREFIX = "MAPTAG_"


@dataclass
class ServiceConfig:
    listen: str = "127.0.0.1:8764"
    data_dir: str | None = None
    provider_mode: str = "fixture"  # "fixture" or "live"
    entity_endpoint: str | None = None
    gazetteer_endpoint: str | None = None
    suggestion_cap: int = 15
    request_timeout_ms: int = 5000
    base_uri: str | None = None

    def __post_init__(self):
        if self.provider_mode not in ("fixture", "live"):
            raise ValidationError(f"provider_mode must be 'fixture' or 'live', got {self.provider_mode!r}")
        if self.suggestion_cap < 0:
            raise ValidationError("suggestion_cap must be >= 0")
        if self.request_timeout_ms <= 0:
            raise ValidationError("request_timeout_ms must be positive")
        if self.provider_mode == "live" and not (self.entity_endpoint and self.gazetteer_endpoint):
            raise ValidationError("live provider mode needs entity_endpoint and gazetteer_endpoint")

    @property
    def host(self) -> str:
        return self.listen.rsplit(":", 1)[0]

    @property
    def port(self) -> int:
        return int(self.listen.rsplit(":", 1)[1])

    @property
    def resolved_base_uri(self) -> str:
        return (self.base_uri or f"http://{self.listen}").rstrip("/")

    @property
    def timeout_s(self) -> float:
        return self.request_timeout_ms / 1000.0


_FIELDS = {
    "listen": str,
    "data_dir": str,
    "provider_mode": str,
    "entity_endpoint": str,
    "gazetteer_endpoint": str,
    "suggestion_cap": int,
    "request_timeout_ms": int,
    "base_uri": str,
}


def load_config(path: str | Path | None = None, env: dict[str, str] | None = None) -> ServiceConfig:
    """Config from an optional JSON file with MAPTAG_* environment overrides."""
    env = os.environ if env is None else env
    values: dict = {}
    if path is not None:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        unknown = set(raw) - set(_FIELDS)
        if unknown:
            raise ValidationError(f"unknown config fields: {sorted(unknown)}")
        values.update(raw)
    for name, cast in _FIELDS.items():
        env_key = ENV_PREFIX + name.upper()
        if env_key in env:
            values[name] = cast(env[env_key])
    return ServiceConfig(**values)
