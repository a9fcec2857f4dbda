"""Live HTTP provider adapters.

Opt-in replacements for the bundled fixture providers: thin JSON-over-HTTP
clients with a request timeout, a single retry, and a ten-minute response
cache. They implement the same provider interfaces as the fixtures, so the
suggestion pipelines cannot tell them apart.

Wire formats (see docs/api.md):

    entity endpoint     GET ?q=<text>
                        -> {"entities": [{"uri", "label", "abstract"?,
                                          "lon"?, "lat"?, "score"}, ...]}
    gazetteer endpoint  GET ?west=&south=&east=&north=&limit=
                        -> {"places": [{"uri", "label", "abstract"?,
                                        "lon", "lat"}, ...]}
"""

from __future__ import annotations

import json
import time
from typing import Callable

import requests

from .errors import ProviderUnavailableError
from .geo import GeoBBox
from .graph import KnowledgeResource

CACHE_TTL_S = 600.0


def _default_fetch(url: str, params: dict, timeout_s: float) -> dict:
    response = requests.get(url, params=params, timeout=timeout_s)
    response.raise_for_status()
    return response.json()


class CachedFetcher:
    """GET-with-retry plus a TTL response cache keyed on url+params."""

    def __init__(
        self,
        timeout_s: float = 5.0,
        cache_ttl_s: float = CACHE_TTL_S,
        fetch: Callable[[str, dict, float], dict] | None = None,
        clock: Callable[[], float] = time.monotonic,
    ):
        self.timeout_s = timeout_s
        self.cache_ttl_s = cache_ttl_s
        self._fetch = fetch or _default_fetch
        self._clock = clock
        self._cache: dict[str, tuple[float, dict]] = {}

    def get_json(self, url: str, params: dict) -> dict:
        key = url + "?" + json.dumps(params, sort_keys=True)
        now = self._clock()
        cached = self._cache.get(key)
        if cached and cached[0] > now:
            return cached[1]
        last_error: Exception | None = None
        for _attempt in range(2):  # one retry
            try:
                payload = self._fetch(url, params, self.timeout_s)
                self._cache[key] = (now + self.cache_ttl_s, payload)
                return payload
            except Exception as exc:
                last_error = exc
        raise ProviderUnavailableError(f"provider at {url} unavailable: {last_error}") from last_error


def _concept_from_record(rec: dict, source: str) -> KnowledgeResource:
    geo = None
    if rec.get("lon") is not None and rec.get("lat") is not None:
        geo = (float(rec["lon"]), float(rec["lat"]))
    return KnowledgeResource(
        uri=rec["uri"],
        label=rec["label"],
        abstract=rec.get("abstract"),
        source=source,
        geo=geo,
    )


class HttpEntityProvider:
    """Entity recognition over a remote service."""

    def __init__(self, endpoint: str, fetcher: CachedFetcher | None = None):
        self.endpoint = endpoint
        self.fetcher = fetcher or CachedFetcher()

    def recognize(self, text: str) -> list[tuple[KnowledgeResource, float]]:
        payload = self.fetcher.get_json(self.endpoint, {"q": text})
        out = []
        for rec in payload.get("entities", []):
            score = min(1.0, max(0.0, float(rec.get("score", 0.5))))
            out.append((_concept_from_record(rec, "live-entity"), score))
        return out


class HttpGazetteerProvider:
    """Bounding-box place lookup over a remote service."""

    def __init__(self, endpoint: str, fetcher: CachedFetcher | None = None):
        self.endpoint = endpoint
        self.fetcher = fetcher or CachedFetcher()

    def within(self, bbox: GeoBBox, limit: int) -> list[KnowledgeResource]:
        params = {
            "west": bbox.min_lon,
            "south": bbox.min_lat,
            "east": bbox.max_lon,
            "north": bbox.max_lat,
            "limit": limit,
        }
        payload = self.fetcher.get_json(self.endpoint, params)
        return [_concept_from_record(rec, "live-gazetteer") for rec in payload.get("places", [])][:limit]
