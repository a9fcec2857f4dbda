"""Tagging-graph behavior: upserts, polarity sets, judgments, event log."""

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maptag.errors import NotFoundError, ValidationError
from maptag.graph import (
    KnowledgeResource,
    Origin,
    Polarity,
    ResourceRef,
    TagGraph,
    UserRef,
)

WIKI = "http://en.wikipedia.org/wiki"


def concept(name, label=None):
    return KnowledgeResource(uri=f"{WIKI}/{name}", label=label or name.replace("_", " "))


@pytest.fixture
def graph():
    g = TagGraph()
    g.add_resource(ResourceRef(uri="http://maps.example/annotations/ann1", kind="annotation"))
    g.add_resource(ResourceRef(uri="http://maps.example/annotations/img-of-paris", kind="annotation"))
    return g


ANN1 = "http://maps.example/annotations/ann1"
IMG = "http://maps.example/annotations/img-of-paris"
U1 = UserRef(id="u1", display_name="User One")


class TestRecordRelationship:
    def test_single_accept(self, graph):
        edge = graph.record_relationship(U1, concept("Paris"), ANN1, Polarity.ACCEPTED)
        assert edge.polarity is Polarity.ACCEPTED
        assert graph.positive_set(ANN1) == {f"{WIKI}/Paris"}

    def test_rejected_tag_lands_in_negative_set(self, graph):
        graph.record_relationship(U1, concept("Berlin"), IMG, Polarity.REJECTED)
        assert graph.negative_set(IMG) == {f"{WIKI}/Berlin"}
        assert graph.positive_set(IMG) == set()

    def test_upsert_replaces_polarity(self, graph):
        first = graph.record_relationship(U1, concept("Paris"), ANN1, Polarity.ACCEPTED)
        second = graph.record_relationship(U1, concept("Paris"), ANN1, Polarity.REJECTED)
        assert first.id == second.id
        assert graph.edge_count() == 1
        assert graph.negative_set(ANN1) == {f"{WIKI}/Paris"}
        assert graph.positive_set(ANN1) == set()

    def test_unknown_target(self, graph):
        with pytest.raises(NotFoundError):
            graph.record_relationship(U1, concept("Paris"), "http://maps.example/annotations/nope", "accepted")

    def test_label_tag_cannot_be_rejected(self, graph):
        with pytest.raises(ValidationError):
            graph.record_relationship(U1, "Ithaca", ANN1, Polarity.REJECTED)

    def test_label_that_is_a_uri_rejected(self, graph):
        with pytest.raises(ValidationError):
            graph.record_relationship(U1, "http://sneaky.example/x", ANN1, Polarity.ACCEPTED)

    def test_label_keys_case_insensitive(self, graph):
        e1 = graph.record_relationship(U1, "Ithaca", ANN1, Polarity.ACCEPTED)
        e2 = graph.record_relationship(U1, "ithaca", ANN1, Polarity.NEUTRAL)
        assert e1.id == e2.id
        assert graph.edge_count() == 1


class TestPolaritySets:
    def test_empty_graph(self, graph):
        assert graph.positive_set(ANN1) == set()
        assert graph.negative_set(ANN1) == set()

    def test_unknown_target(self, graph):
        with pytest.raises(NotFoundError):
            graph.positive_set("http://maps.example/annotations/nope")

    def test_multiplicity_in_attributed_view(self, graph):
        for uid in ("u1", "u2", "u3"):
            graph.record_relationship(UserRef(id=uid), concept("Paris"), ANN1, "accepted")
        assert graph.positive_set(ANN1) == {f"{WIKI}/Paris"}
        attributed = graph.attributions(ANN1, "accepted")
        assert attributed[f"{WIKI}/Paris"] == ["u1", "u2", "u3"]

    def test_neutral_only_is_empty(self, graph):
        graph.record_relationship(U1, concept("Paris"), ANN1, "neutral")
        assert graph.positive_set(ANN1) == set()
        assert graph.negative_set(ANN1) == set()

    def test_accept_then_reject_moves_sets(self, graph):
        graph.record_relationship(U1, concept("Berlin"), IMG, "accepted")
        graph.record_relationship(U1, concept("Berlin"), IMG, "rejected")
        assert graph.negative_set(IMG) == {f"{WIKI}/Berlin"}
        assert graph.positive_set(IMG) == set()

    def test_per_user_disjointness(self, graph):
        # One user's current judgment on one target is never in both sets.
        graph.record_relationship(U1, concept("Paris"), ANN1, "accepted")
        graph.record_relationship(U1, concept("Berlin"), ANN1, "rejected")
        pos = graph.attributions(ANN1, "accepted")
        neg = graph.attributions(ANN1, "rejected")
        both = {k for k, users in pos.items() if "u1" in users} & {
            k for k, users in neg.items() if "u1" in users
        }
        assert both == set()


class TestRelevanceJudgments:
    def test_single_negative_row(self, graph):
        graph.record_relationship(U1, concept("Berlin"), IMG, "rejected")
        assert graph.relevance_judgments() == [(f"{WIKI}/Berlin", IMG, -1)]

    def test_mixed_graph_signs(self, graph):
        graph.record_relationship(U1, concept("Paris"), ANN1, "accepted")
        graph.record_relationship(U1, concept("Seine"), ANN1, "accepted")
        graph.record_relationship(U1, concept("Berlin"), ANN1, "rejected")
        rows = graph.relevance_judgments()
        assert len(rows) == 3
        signs = {tag: sign for tag, _, sign in rows}
        assert signs[f"{WIKI}/Paris"] == 1
        assert signs[f"{WIKI}/Seine"] == 1
        assert signs[f"{WIKI}/Berlin"] == -1

    def test_neutral_only_graph_empty(self, graph):
        graph.record_relationship(U1, concept("Paris"), ANN1, "neutral")
        assert graph.relevance_judgments() == []

    def test_label_edges_included(self, graph):
        graph.record_relationship(U1, "Ithaca", ANN1, "accepted")
        assert graph.relevance_judgments() == [("Ithaca", ANN1, 1)]

    @settings(max_examples=30)
    @given(
        st.lists(
            st.tuples(
                st.sampled_from(["u1", "u2", "u3"]),
                st.sampled_from(["Paris", "Berlin", "Rome", "Tokyo"]),
                st.sampled_from([ANN1, IMG]),
                st.sampled_from(["accepted", "rejected", "neutral"]),
            ),
            max_size=100,
        )
    )
    def test_row_count_matches_non_neutral_edges(self, ops):
        g = TagGraph()
        g.add_resource(ResourceRef(uri=ANN1, kind="annotation"))
        g.add_resource(ResourceRef(uri=IMG, kind="annotation"))
        # Brute-force oracle: replay the op list into a dict keyed like the graph.
        oracle = {}
        for uid, name, target, polarity in ops:
            g.record_relationship(UserRef(id=uid), concept(name), target, polarity)
            oracle[(uid, f"{WIKI}/{name}", target)] = polarity
        expected = sum(1 for p in oracle.values() if p != "neutral")
        assert len(g.relevance_judgments()) == expected
        assert g.edge_count() == len(oracle)


class TestCooccurring:
    def test_count_ranking(self, graph):
        graph.add_resource(ResourceRef(uri="http://maps.example/annotations/ann2", kind="annotation"))
        ann2 = "http://maps.example/annotations/ann2"
        graph.record_relationship(U1, concept("Alps", "Alps"), ANN1, "accepted")
        graph.record_relationship(U1, concept("Alps", "Alps"), ann2, "accepted")
        graph.record_relationship(U1, concept("Bern", "Bern"), ANN1, "accepted")
        assert graph.cooccurring_concepts("u1") == [f"{WIKI}/Alps", f"{WIKI}/Bern"]

    def test_unknown_user(self, graph):
        with pytest.raises(NotFoundError):
            graph.cooccurring_concepts("ghost")

    def test_registered_user_empty_graph(self, graph):
        graph.add_user(UserRef(id="newbie"))
        assert graph.cooccurring_concepts("newbie") == []

    def test_limit_truncates(self, graph):
        graph.record_relationship(U1, concept("Alps"), ANN1, "accepted")
        graph.record_relationship(U1, concept("Bern"), ANN1, "accepted")
        ranked = graph.cooccurring_concepts("u1", limit=1)
        assert len(ranked) == 1

    def test_cotagger_concepts_included(self, graph):
        u2 = UserRef(id="u2")
        graph.record_relationship(U1, concept("Paris"), ANN1, "accepted")
        graph.record_relationship(u2, concept("Paris"), ANN1, "accepted")
        graph.record_relationship(u2, concept("Louvre"), IMG, "accepted")
        # u2 co-tags ann1 with u1, so u2's Louvre acceptance counts for u1.
        assert f"{WIKI}/Louvre" in graph.cooccurring_concepts("u1")

    def test_equal_counts_tie_break_by_label(self, graph):
        graph.record_relationship(U1, concept("Zermatt", "Zermatt"), ANN1, "accepted")
        graph.record_relationship(U1, concept("Basel", "Basel"), ANN1, "accepted")
        graph.record_relationship(U1, concept("Geneva", "Geneva"), ANN1, "accepted")
        ranked = graph.cooccurring_concepts("u1")
        assert ranked == [f"{WIKI}/Basel", f"{WIKI}/Geneva", f"{WIKI}/Zermatt"]


class TestEventLog:
    def test_replay_reproduces_state(self, tmp_path):
        log = tmp_path / "events.log"
        g = TagGraph(event_log_path=log)
        g.add_resource(ResourceRef(uri=ANN1, kind="annotation"))
        g.record_relationship(U1, concept("Paris"), ANN1, "accepted")
        g.record_relationship(U1, concept("Paris"), ANN1, "rejected")
        g.record_relationship(U1, "Ithaca", ANN1, "accepted")

        replayed = TagGraph(event_log_path=log)
        assert replayed.edge_state() == g.edge_state()
        assert replayed.relevance_judgments() == g.relevance_judgments()

    def test_log_record_fields(self, tmp_path):
        log = tmp_path / "events.log"
        g = TagGraph(event_log_path=log)
        g.add_resource(ResourceRef(uri=ANN1, kind="annotation"))
        g.record_relationship(U1, "Ithaca", ANN1, "accepted")
        record = json.loads(log.read_text().splitlines()[0])
        assert set(record) == {"id", "user", "concept_uri_or_label", "target_uri", "polarity", "origin", "timestamp"}
        assert record["concept_uri_or_label"] == "Ithaca"
        assert record["origin"] == "manual"

    def test_upsert_appends_not_rewrites(self, tmp_path):
        log = tmp_path / "events.log"
        g = TagGraph(event_log_path=log)
        g.add_resource(ResourceRef(uri=ANN1, kind="annotation"))
        g.record_relationship(U1, concept("Paris"), ANN1, "accepted")
        g.record_relationship(U1, concept("Paris"), ANN1, "neutral")
        lines = log.read_text().splitlines()
        assert len(lines) == 2
        assert json.loads(lines[0])["id"] == json.loads(lines[1])["id"]

    def test_coding_survives_reload(self, tmp_path):
        log = tmp_path / "events.log"
        g = TagGraph(event_log_path=log)
        g.add_resource(ResourceRef(uri=ANN1, kind="annotation"))
        edge = g.record_relationship(U1, "Ithaca", ANN1, "accepted")
        g.code_relationship(edge.id, "factual", "location")

        reloaded = TagGraph(event_log_path=log)
        edges = reloaded.edges_for_target(ANN1)
        assert edges[0].coding == {"type": "factual", "category": "location"}

    def test_coding_validation(self, graph):
        edge = graph.record_relationship(U1, "Ithaca", ANN1, "accepted")
        with pytest.raises(ValidationError):
            graph.code_relationship(edge.id, "nonsense", "location")
        with pytest.raises(NotFoundError):
            graph.code_relationship("e999", "factual", "location")


class TestDistinctAcceptedTags:
    def test_pool_contents(self, graph):
        graph.record_relationship(U1, concept("Paris"), ANN1, "accepted")
        graph.record_relationship(U1, concept("Berlin"), ANN1, "rejected")
        graph.record_relationship(U1, concept("Rome"), ANN1, "neutral")
        graph.record_relationship(U1, "Ithaca", ANN1, "accepted")
        pool = {e.key for e in graph.distinct_accepted_tags()}
        assert pool == {f"{WIKI}/Paris", "ithaca"}

    def test_deduplicates_across_users_and_targets(self, graph):
        graph.record_relationship(U1, concept("Paris"), ANN1, "accepted")
        graph.record_relationship(UserRef(id="u2"), concept("Paris"), IMG, "accepted")
        assert len(graph.distinct_accepted_tags()) == 1


@settings(max_examples=25)
@given(
    st.lists(
        st.tuples(
            st.sampled_from(["u1", "u2"]),
            st.sampled_from(["A", "B", "C"]),
            st.sampled_from(["accepted", "rejected", "neutral"]),
        ),
        max_size=60,
    )
)
def test_upsert_keeps_one_polarity_per_key(ops):
    g = TagGraph()
    g.add_resource(ResourceRef(uri=ANN1, kind="annotation"))
    last = {}
    for uid, name, polarity in ops:
        g.record_relationship(UserRef(id=uid), concept(name), ANN1, polarity)
        last[(uid, f"{WIKI}/{name}", ANN1)] = polarity
    state = g.edge_state()
    assert len(state) == len(last)
    for key, polarity in last.items():
        assert state[key][0] == polarity
