"""Live HTTP provider adapters: retry, caching, degradation."""

import itertools

import pytest

from maptag.config import ServiceConfig
from maptag.errors import ProviderUnavailableError
from maptag.geo import GeoBBox
from maptag.live import CachedFetcher, HttpEntityProvider, HttpGazetteerProvider
from maptag.service import create_app
from maptag.store import AnnotationStore
from fastapi.testclient import TestClient


class FakeClock:
    def __init__(self):
        self.now = 0.0

    def __call__(self):
        return self.now


class TestCachedFetcher:
    def test_retry_once_then_succeed(self):
        calls = []

        def flaky(url, params, timeout_s):
            calls.append(url)
            if len(calls) == 1:
                raise ConnectionError("first try fails")
            return {"ok": True}

        fetcher = CachedFetcher(fetch=flaky)
        assert fetcher.get_json("http://svc.example", {}) == {"ok": True}
        assert len(calls) == 2

    def test_two_failures_raise(self):
        def broken(url, params, timeout_s):
            raise ConnectionError("down")

        fetcher = CachedFetcher(fetch=broken)
        with pytest.raises(ProviderUnavailableError):
            fetcher.get_json("http://svc.example", {})

    def test_cache_hit_within_ttl(self):
        counter = itertools.count()
        clock = FakeClock()
        fetcher = CachedFetcher(fetch=lambda u, p, t: {"n": next(counter)}, cache_ttl_s=600, clock=clock)
        first = fetcher.get_json("http://svc.example", {"q": "x"})
        clock.now = 599.0
        assert fetcher.get_json("http://svc.example", {"q": "x"}) == first
        clock.now = 601.0
        assert fetcher.get_json("http://svc.example", {"q": "x"}) != first

    def test_cache_keyed_on_params(self):
        counter = itertools.count()
        fetcher = CachedFetcher(fetch=lambda u, p, t: {"n": next(counter)}, clock=FakeClock())
        a = fetcher.get_json("http://svc.example", {"q": "a"})
        b = fetcher.get_json("http://svc.example", {"q": "b"})
        assert a != b


class TestHttpProviders:
    def test_entity_parsing_and_score_clamp(self):
        payload = {
            "entities": [
                {"uri": "http://kb.example/paris", "label": "Paris", "score": 0.9, "abstract": "The city."},
                {"uri": "http://kb.example/mars", "label": "Mars", "score": 7.0},
            ]
        }
        provider = HttpEntityProvider("http://ner.example", CachedFetcher(fetch=lambda u, p, t: payload))
        hits = provider.recognize("text")
        assert hits[0][0].label == "Paris"
        assert hits[0][0].abstract == "The city."
        assert hits[1][1] == 1.0  # clamped into [0, 1]

    def test_gazetteer_params_and_limit(self):
        seen = {}

        def capture(url, params, timeout_s):
            seen.update(params)
            return {
                "places": [
                    {"uri": f"http://kb.example/p{i}", "label": f"P{i}", "lon": 1.0, "lat": 2.0}
                    for i in range(5)
                ]
            }

        provider = HttpGazetteerProvider("http://geo.example", CachedFetcher(fetch=capture))
        box = GeoBBox(min_lon=0.0, min_lat=1.0, max_lon=2.0, max_lat=3.0)
        places = provider.within(box, limit=3)
        assert len(places) == 3
        assert seen == {"west": 0.0, "south": 1.0, "east": 2.0, "north": 3.0, "limit": 3}
        assert places[0].geo == (1.0, 2.0)


class TestLiveModeService:
    def make_live_client(self, monkeypatch, fetch):
        monkeypatch.setattr("maptag.live._default_fetch", fetch)
        config = ServiceConfig(
            provider_mode="live",
            entity_endpoint="http://ner.example",
            gazetteer_endpoint="http://geo.example",
        )
        store = AnnotationStore(base_uri=config.resolved_base_uri)
        client = TestClient(create_app(config, store=store))
        client.post(
            "/maps",
            json={"id": "m1", "title": "t", "image_uri": "u", "width": 1000, "height": 800},
        )
        r = client.post(
            "/maps/m1/annotations",
            json={"shape": [[0, 0], [10, 0], [10, 10]], "body_text": "x",
                  "creator": {"id": "u1"}, "condition": "SMT"},
        )
        return client, r.json()["id"] if r.headers["content-type"].startswith("application/json") else None

    def test_outage_degrades_but_mutations_survive(self, monkeypatch):
        def down(url, params, timeout_s):
            raise ConnectionError("socket timeout")

        client, ann_id = self.make_live_client(monkeypatch, down)
        r = client.get("/suggest/text", params={"annotation": ann_id, "q": "Paris"})
        assert r.status_code == 502
        assert r.json() == {"suggestions": [], "degraded": True, "detail": r.json()["detail"]}
        # state untouched, and mutations still work
        assert client.get(f"/annotations/{ann_id}/tags").json()["tags"] == []
        ok = client.post(
            "/maps/m1/annotations",
            json={"shape": [[0, 0], [10, 0], [10, 10]], "body_text": "still works",
                  "creator": {"id": "u1"}, "condition": "LT"},
        )
        assert ok.status_code == 201

    def test_live_suggestions_flow_through(self, monkeypatch):
        def ner(url, params, timeout_s):
            return {"entities": [{"uri": "http://kb.example/paris", "label": "Paris", "score": 0.9}]}

        client, ann_id = self.make_live_client(monkeypatch, ner)
        r = client.get("/suggest/text", params={"annotation": ann_id, "q": "Paris"})
        assert r.status_code == 200
        assert [s["label"] for s in r.json()["suggestions"]] == ["Paris"]


class TestConfig:
    def test_env_overrides(self, tmp_path):
        from maptag.config import load_config

        cfg_file = tmp_path / "cfg.json"
        cfg_file.write_text('{"listen": "0.0.0.0:9001", "suggestion_cap": 10}')
        cfg = load_config(cfg_file, env={"MAPTAG_SUGGESTION_CAP": "7", "MAPTAG_DATA_DIR": "/tmp/x"})
        assert cfg.listen == "0.0.0.0:9001"
        assert cfg.suggestion_cap == 7
        assert cfg.data_dir == "/tmp/x"
        assert cfg.port == 9001

    def test_live_mode_requires_endpoints(self):
        with pytest.raises(Exception):
            ServiceConfig(provider_mode="live")

    def test_unknown_field_rejected(self, tmp_path):
        from maptag.config import load_config
        from maptag.errors import ValidationError

        cfg_file = tmp_path / "cfg.json"
        cfg_file.write_text('{"nonsense": 1}')
        with pytest.raises(ValidationError):
            load_config(cfg_file, env={})
