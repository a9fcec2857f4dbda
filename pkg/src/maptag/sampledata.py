"""Deterministic synthetic experiment dataset.

Builds the benchmark workload used by demos and the acceptance suite:
24 participants, each annotating once under every tagging condition, with
condition order counterbalanced by a balanced Latin square. Accepted-tag
totals per condition are fixed (65, 26, 57, 73, i.e. 221 tags over 96
annotations) and the annotations split 45/51 over two bundled maps.

Everything is dealt round-robin from fixed pools, so repeated runs produce
identical stores (given a deterministic id factory and clock) and no label
ever repeats within a single annotation.
"""

from __future__ import annotations

from dataclasses import dataclass

from .graph import UserRef
from .providers import load_knowledge_context
from .stats import balanced_latin_square
from .store import AnnotationStore, Condition, MapRecord
from .suggest import Suggestion

PARTICIPANTS = 24
CONDITIONS = ("LT", "ST", "SMT", "SMT_CTX")
ACCEPTED_PER_CONDITION = {"LT": 65, "ST": 26, "SMT": 57, "SMT_CTX": 73}
TOTAL_ACCEPTED = sum(ACCEPTED_PER_CONDITION.values())  # 221
MAP_SPLIT = {"m1": 45, "m2": 51}

# Coding splits per condition: (factual, personal) and per-category counts
# (event, location, other, people, time). Row sums equal the accepted totals.
TYPE_SPLIT = {"LT": (29, 36), "ST": (14, 12), "SMT": (29, 28), "SMT_CTX": (33, 40)}
CATEGORY_SPLIT = {
    "LT": (4, 38, 17, 5, 1),
    "ST": (0, 14, 11, 1, 0),
    "SMT": (1, 33, 17, 6, 0),
    "SMT_CTX": (0, 34, 35, 4, 0),
}

LT_LABELS = (
    ["Ithaca"] * 6
    + ["Cornell University"] * 3
    + ["New York"] * 2
    + [f"Lakeside town {i}" for i in range(20)]
    + [f"Hiking trail {i}" for i in range(18)]
    + [f"Harbor {i}" for i in range(16)]
)  # 65 labels
ST_LABELS = (
    ["Culture"] * 2
    + ["historical differences"] * 2
    + ["New Jersey"] * 2
    + [f"Remembered place {i}" for i in range(20)]
)  # 26 labels

SAMPLE_MAPS = [
    MapRecord(
        id="m1",
        title="World map, early 16th century",
        image_uri="http://images.example/world-1507.jpg",
        width=4000,
        height=3000,
        metadata={"region": "world", "century": "16th"},
    ),
    MapRecord(
        id="m2",
        title="East coast of North America, 18th century",
        image_uri="http://images.example/east-coast-1780.jpg",
        width=2500,
        height=2000,
        metadata={"region": "north america", "century": "18th"},
    ),
]


@dataclass(frozen=True)
class ExperimentSummary:
    annotations: int
    accepted_tags: int
    per_condition: dict[str, int]
    annotation_ids: tuple[str, ...]


def _deal(items: list, bins: int) -> list[list]:
    """Deal items round-robin into bins; earlier bins get the remainder."""
    dealt: list[list] = [[] for _ in range(bins)]
    for i, item in enumerate(items):
        dealt[i % bins].append(item)
    return dealt


def _concept_suggestions(context, condition: str) -> list[list[Suggestion]]:
    """Per-annotation concept suggestion lists for a suggestive condition.

    Labels already used by the manual-entry pool are excluded so every
    label in the dataset has a single provenance.
    """
    total = ACCEPTED_PER_CONDITION[condition]
    pool = [c for c in context.concepts if c.geo is not None and c.label not in LT_LABELS]
    origin = "history" if condition == "ST" else "text"
    picks = []
    for i in range(total):
        c = pool[i % len(pool)]
        picks.append(
            Suggestion(label=c.label, score=0.5, origin=origin, uri=c.uri, abstract=c.abstract, geo=c.geo)
        )
    return _deal(picks, PARTICIPANTS)


def _history_suggestions() -> list[list[Suggestion]]:
    picks = [Suggestion(label=label, score=0.5, origin="history") for label in ST_LABELS]
    return _deal(picks, PARTICIPANTS)


def seed_experiment(store: AnnotationStore, code_tags: bool = True) -> ExperimentSummary:
    """Populate a store with the full synthetic experiment.

    With code_tags=True every accepted tag also receives type and category
    codes whose per-condition splits match the bundled contingency tables,
    so live chi-square reports reproduce the bundled tables' statistics.
    """
    context = load_knowledge_context()
    for record in SAMPLE_MAPS:
        if record.id not in {m.id for m in store.maps()}:
            store.add_map(record)

    users = [UserRef(id=f"p{i:02d}", display_name=f"Participant {i + 1}") for i in range(PARTICIPANTS)]
    square = balanced_latin_square(4, labels=list(CONDITIONS))

    lt_lists = _deal(list(LT_LABELS), PARTICIPANTS)
    st_lists = _history_suggestions()
    smt_lists = _concept_suggestions(context, "SMT")
    ctx_lists = _concept_suggestions(context, "SMT_CTX")
    per_participant = {"LT": lt_lists, "ST": st_lists, "SMT": smt_lists, "SMT_CTX": ctx_lists}

    annotation_ids = []
    slot = 0
    for round_no in range(4):
        for p, user in enumerate(users):
            condition = square[p % 4][round_no]
            map_id = "m1" if (slot % 2 == 0 and slot < 90) else "m2"
            record = store.get_map(map_id)
            x = 40 + (slot * 53) % (record.width - 300)
            y = 30 + (slot * 37) % (record.height - 250)
            shape = [(x, y), (x + 220, y), (x + 220, y + 180), (x, y + 180)]
            body = f"Session {round_no + 1} notes by {user.display_name} on {record.title}."
            annotation = store.create_annotation(map_id, shape, body, user, condition)
            annotation_ids.append(annotation.id)

            payload = per_participant[condition][p]
            if condition == "LT":
                store.add_label_tags(annotation.id, ", ".join(payload))
            else:
                attached = store.attach_suggestions(annotation.id, payload)
                for tag in attached:
                    store.set_tag_state(annotation.id, tag.key, "accepted")
            slot += 1

    if code_tags:
        _code_tags(store)

    per_condition = {c: 0 for c in CONDITIONS}
    for ann_id in annotation_ids:
        annotation = store.get_annotation(ann_id)
        per_condition[annotation.condition.value] += annotation.accepted_count()
    return ExperimentSummary(
        annotations=len(annotation_ids),
        accepted_tags=sum(per_condition.values()),
        per_condition=per_condition,
        annotation_ids=tuple(annotation_ids),
    )


def _code_tags(store: AnnotationStore) -> None:
    """Assign type/category codes matching the bundled contingency tables."""
    edges_by_condition: dict[str, list] = {c: [] for c in CONDITIONS}
    for annotation in store.annotations():
        for edge in store.graph.edges_for_target(annotation.uri):
            if edge.polarity.value == "accepted":
                edges_by_condition[annotation.condition.value].append(edge)
    for condition, edges in edges_by_condition.items():
        factual, personal = TYPE_SPLIT[condition]
        assert len(edges) == factual + personal
        types = ["factual"] * factual + ["personal"] * personal
        categories = []
        for code, count in zip(("event", "location", "other", "people", "time"), CATEGORY_SPLIT[condition]):
            categories.extend([code] * count)
        for edge, type_code, category_code in zip(edges, types, categories):
            store.graph.code_relationship(edge.id, type_code, category_code)
