"""Suggestion pipeline tests against the bundled fixture context.

The merge and region operations are checked against brute-force oracles:
a dict/sort reimplementation of dedupe-and-rank, and plain point-in-box
filtering over the raw fixture records.
"""

import random

import pytest

from maptag.errors import ProviderUnavailableError, ValidationError
from maptag.geo import GeoBBox
from maptag.graph import KnowledgeResource, ResourceRef, TagGraph, UserRef
from maptag.providers import GIBRALTAR_SAMPLE_TEXT, load_knowledge_context
from maptag.suggest import (
    Suggestion,
    expand_related,
    merge_suggestions,
    suggest_from_history,
    suggest_from_region,
    suggest_from_text,
)

WIKI = "http://en.wikipedia.org/wiki"


@pytest.fixture(scope="module")
def ctx():
    return load_knowledge_context()


class FailingProvider:
    def recognize(self, text):
        raise ConnectionError("boom")

    def within(self, bbox, limit):
        raise ConnectionError("boom")

    def related(self, uri, limit):
        raise ConnectionError("boom")


class TestTextSuggestions:
    def test_gibraltar_text_includes_mediterranean(self, ctx):
        out = suggest_from_text(GIBRALTAR_SAMPLE_TEXT, ctx, limit=20)
        by_label = {s.label: s for s in out}
        assert "Mediterranean Sea" in by_label
        assert by_label["Mediterranean Sea"].uri == f"{WIKI}/Mediterranean_sea"
        assert all(s.origin == "text" for s in out)
        scores = [s.score for s in out]
        assert scores == sorted(scores, reverse=True)

    def test_labels_carry_uris_internally(self, ctx):
        out = suggest_from_text(GIBRALTAR_SAMPLE_TEXT, ctx, limit=5)
        for s in out:
            assert s.uri and s.uri.startswith("http://")
            assert s.label and "://" not in s.label

    def test_empty_text(self, ctx):
        assert suggest_from_text("", ctx) == []
        assert suggest_from_text("   ", ctx) == []

    def test_limit_truncation_keeps_rank_order(self, ctx):
        full = suggest_from_text(GIBRALTAR_SAMPLE_TEXT, ctx, limit=50)
        assert len(full) >= 5
        two = suggest_from_text(GIBRALTAR_SAMPLE_TEXT, ctx, limit=2)
        assert [s.uri for s in two] == [s.uri for s in full[:2]]

    def test_provider_failure(self):
        with pytest.raises(ProviderUnavailableError):
            suggest_from_text("anything", FailingProvider())

    def test_negative_limit(self, ctx):
        with pytest.raises(ValidationError):
            suggest_from_text("x", ctx, limit=-1)


class TestRegionSuggestions:
    STRAIT_BOX = GeoBBox(min_lon=-6.0, min_lat=35.5, max_lon=-5.0, max_lat=36.5)

    def brute_force_within(self, ctx, bbox):
        return [
            c.uri
            for c in ctx.concepts
            if c.geo is not None
            and bbox.min_lon <= c.geo[0] <= bbox.max_lon
            and bbox.min_lat <= c.geo[1] <= bbox.max_lat
        ]

    def test_exactly_the_contained_fixtures(self, ctx):
        expected = self.brute_force_within(ctx, self.STRAIT_BOX)
        assert len(expected) >= 3  # fixture has several places around the strait
        out = suggest_from_region(self.STRAIT_BOX, ctx, limit=50)
        assert [s.uri for s in out] == expected
        assert all(s.origin == "region" for s in out)

    def test_containment_invariant(self, ctx):
        out = suggest_from_region(self.STRAIT_BOX, ctx, limit=50)
        for s in out:
            assert s.geo is not None
            assert self.STRAIT_BOX.contains(s.geo[0], s.geo[1])

    def test_empty_intersection(self, ctx):
        box = GeoBBox(min_lon=170.0, min_lat=-60.0, max_lon=175.0, max_lat=-55.0)
        assert suggest_from_region(box, ctx, limit=10) == []

    def test_limit_one(self, ctx):
        expected = self.brute_force_within(ctx, self.STRAIT_BOX)
        out = suggest_from_region(self.STRAIT_BOX, ctx, limit=1)
        assert [s.uri for s in out] == expected[:1]

    def test_provider_failure(self):
        with pytest.raises(ProviderUnavailableError):
            suggest_from_region(self.STRAIT_BOX, FailingProvider())

    def test_random_boxes_match_brute_force(self, ctx):
        rng = random.Random(42)
        for _ in range(100):
            lon0, lon1 = sorted(rng.uniform(-180, 180) for _ in range(2))
            lat0, lat1 = sorted(rng.uniform(-80, 80) for _ in range(2))
            box = GeoBBox(min_lon=lon0, min_lat=lat0, max_lon=lon1, max_lat=lat1)
            assert [s.uri for s in suggest_from_region(box, ctx, limit=100)] == self.brute_force_within(ctx, box)


class TestHistorySuggestions:
    def seeded_graph(self):
        g = TagGraph()
        ann = "http://maps.example/annotations/a1"
        g.add_resource(ResourceRef(uri=ann, kind="annotation"))
        u = UserRef(id="u1")
        g.record_relationship(u, KnowledgeResource(uri=f"{WIKI}/Paris", label="Paris"), ann, "accepted")
        g.record_relationship(u, KnowledgeResource(uri=f"{WIKI}/Berlin", label="Berlin"), ann, "accepted")
        g.record_relationship(u, "Ithaca", ann, "accepted")
        g.record_relationship(u, KnowledgeResource(uri=f"{WIKI}/Rome", label="Rome"), ann, "rejected")
        return g

    def test_empty_graph(self):
        assert suggest_from_history(TagGraph(), rng_seed=1) == []

    def test_exhaustive_sample(self):
        g = self.seeded_graph()
        out = suggest_from_history(g, rng_seed=7, limit=3)
        assert {s.key for s in out} == {f"{WIKI}/Paris", f"{WIKI}/Berlin", "ithaca"}
        assert all(s.origin == "history" and s.score == 0.5 for s in out)

    def test_rejected_tags_not_in_pool(self):
        g = self.seeded_graph()
        out = suggest_from_history(g, rng_seed=7, limit=10)
        assert f"{WIKI}/Rome" not in {s.key for s in out}

    def test_deterministic_per_seed(self):
        g = self.seeded_graph()
        a = suggest_from_history(g, rng_seed=123, limit=2)
        b = suggest_from_history(g, rng_seed=123, limit=2)
        assert a == b

    def test_sample_is_prefix_free_subset(self):
        g = self.seeded_graph()
        pool = {e.key for e in g.distinct_accepted_tags()}
        for seed in range(10):
            picked = [s.key for s in suggest_from_history(g, rng_seed=seed, limit=2)]
            assert len(picked) == len(set(picked)) == 2
            assert set(picked) <= pool


class TestRelatedExpansion:
    def test_paris_links(self, ctx):
        out = expand_related(f"{WIKI}/Paris", ctx, limit=10)
        assert {s.label for s in out} == {"France", "Eiffel Tower"}
        assert all(s.origin == "related" for s in out)

    def test_no_links(self, ctx):
        assert expand_related(f"{WIKI}/Japan", ctx, limit=10) == []

    def test_self_link_filtered(self, ctx):
        out = expand_related(f"{WIKI}/Cartography", ctx, limit=10)
        assert f"{WIKI}/Cartography" not in {s.uri for s in out}
        assert {s.label for s in out} == {"North America"}

    def test_provider_failure(self):
        with pytest.raises(ProviderUnavailableError):
            expand_related(f"{WIKI}/Paris", FailingProvider())


def brute_force_merge(lists, cap, exclude=()):
    """Independent oracle: dict-based dedupe keeping max score, then sort."""
    best = {}
    for lst in lists:
        for s in lst:
            key = s.uri if s.uri else s.label.lower()
            if key in exclude:
                continue
            if key not in best or s.score > best[key].score:
                best[key] = s
    ordered = sorted(best.values(), key=lambda s: (-s.score, s.label, s.uri if s.uri else s.label.lower()))
    return ordered[:cap]


def random_suggestion(rng):
    i = rng.randrange(12)
    label = f"Place {i}"
    uri = f"http://concepts.example/{i}" if rng.random() < 0.8 else None
    return Suggestion(
        label=label,
        score=rng.choice([0.1, 0.25, 0.5, 0.5, 0.75, 1.0]),
        origin=rng.choice(["text", "region", "history", "related"]),
        uri=uri,
    )


class TestMerge:
    def test_duplicate_keeps_highest_score(self):
        a = Suggestion(label="Paris", score=0.9, origin="text", uri=f"{WIKI}/Paris")
        b = Suggestion(label="Paris", score=0.4, origin="region", uri=f"{WIKI}/Paris")
        merged = merge_suggestions([[a], [b]])
        assert merged == [a]

    def test_cap_fifteen(self):
        lots = [
            [Suggestion(label=f"Place {i:02d}", score=1.0 - i / 100, origin="text", uri=f"http://c.example/{i}")]
            for i in range(20)
        ]
        merged = merge_suggestions(lots)
        assert len(merged) == 15
        assert merged[0].label == "Place 00"

    def test_excluded_keys_dropped(self):
        a = Suggestion(label="Paris", score=0.9, origin="text", uri=f"{WIKI}/Paris")
        b = Suggestion(label="Rome", score=0.8, origin="text", uri=f"{WIKI}/Rome")
        merged = merge_suggestions([[a, b]], exclude={f"{WIKI}/Paris"})
        assert merged == [b]

    def test_label_only_dedupe_is_case_insensitive(self):
        a = Suggestion(label="Ithaca", score=0.5, origin="history")
        b = Suggestion(label="ithaca", score=0.7, origin="history")
        merged = merge_suggestions([[a], [b]])
        assert len(merged) == 1
        assert merged[0].score == 0.7

    def test_no_equal_keys_in_output(self):
        rng = random.Random(11)
        lists = [[random_suggestion(rng) for _ in range(10)] for _ in range(4)]
        merged = merge_suggestions(lists)
        keys = [s.key for s in merged]
        assert len(keys) == len(set(keys))

    def test_matches_brute_force_on_random_fixtures(self):
        rng = random.Random(99)
        for round_no in range(100):
            lists = [[random_suggestion(rng) for _ in range(rng.randrange(0, 13))] for _ in range(rng.randrange(1, 5))]
            cap = rng.choice([0, 1, 5, 15])
            exclude = {f"http://concepts.example/{i}" for i in range(3)} if round_no % 3 == 0 else set()
            got = merge_suggestions(lists, cap=cap, exclude=exclude)
            want = brute_force_merge(lists, cap, exclude)
            assert [(s.key, s.score) for s in got] == [(s.key, s.score) for s in want], f"round {round_no}"

    def test_negative_cap_rejected(self):
        with pytest.raises(ValidationError):
            merge_suggestions([], cap=-1)


class TestSuggestionValidation:
    def test_score_range(self):
        with pytest.raises(ValidationError):
            Suggestion(label="x", score=1.5, origin="text")

    def test_empty_label(self):
        with pytest.raises(ValidationError):
            Suggestion(label="", score=0.5, origin="text")

    def test_unknown_origin(self):
        with pytest.raises(ValidationError):
            Suggestion(label="x", score=0.5, origin="telepathy")
