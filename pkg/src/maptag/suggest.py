"""Tag suggestion pipelines.

Suggestions come from three pluggable sources: entity recognition over the
annotation text, a gazetteer queried with the annotation's geographic
bounding box, and a random sample of tags previously applied in the graph.
Concepts linked to an already-suggested concept in the knowledge context
can be pulled in as a fourth, derived source.

Every function here is pure: providers are passed in, randomness is seeded,
and output order is fully determined. Users see labels and abstracts only;
URIs ride along in the records for the back-end but are never required for
display.

History and region sources carry no provider-side ranking, so their
suggestions all get the flat score 0.5; text recognizers must emit their
own non-increasing scores in [0, 1].
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Protocol, Sequence

from .errors import ProviderUnavailableError, ValidationError
from .geo import GeoBBox
from .graph import KnowledgeResource, TagGraph

HISTORY_SCORE = 0.5
REGION_SCORE = 0.5
RELATED_SCORE = 0.5
DISPLAY_CAP = 15

SUGGESTION_ORIGINS = ("text", "region", "history", "related")


@dataclass(frozen=True)
class Suggestion:
    """A candidate tag offered to the user.

    `uri` is None for plain-label candidates (history suggestions drawn
    from label tags); everything else is concept-backed.
    """

    label: str
    score: float
    origin: str
    uri: str | None = None
    abstract: str | None = None
    geo: tuple[float, float] | None = None
    source: str = ""

    def __post_init__(self):
        if not self.label:
            raise ValidationError("suggestion label must be non-empty")
        if not 0.0 <= self.score <= 1.0:
            raise ValidationError(f"suggestion score {self.score} outside [0, 1]")
        if self.origin not in SUGGESTION_ORIGINS:
            raise ValidationError(f"unknown suggestion origin {self.origin!r}")

    @property
    def key(self) -> str:
        """Dedupe key: concept URI, or the lowercased label when none exists."""
        return self.uri if self.uri else self.label.lower()


class EntityProvider(Protocol):
    """Recognizes concepts mentioned in free text."""

    def recognize(self, text: str) -> list[tuple[KnowledgeResource, float]]:
        """Ranked (concept, score) pairs; scores in [0, 1], non-increasing."""
        ...


class GazetteerProvider(Protocol):
    """Looks up geo-located concepts inside a bounding box."""

    def within(self, bbox: GeoBBox, limit: int) -> list[KnowledgeResource]:
        """Concepts whose geo lies inside bbox, at most limit of them."""
        ...


class RelatedProvider(Protocol):
    """Expands a concept to concepts linked to it in the knowledge context."""

    def related(self, concept_uri: str, limit: int) -> list[KnowledgeResource]:
        """Linked concepts, never including the input concept itself."""
        ...


def _suggestion_from_concept(concept: KnowledgeResource, score: float, origin: str) -> Suggestion:
    return Suggestion(
        label=concept.label,
        score=score,
        origin=origin,
        uri=concept.uri,
        abstract=concept.abstract,
        geo=concept.geo,
        source=concept.source,
    )


def suggest_from_text(text: str, provider: EntityProvider, limit: int = DISPLAY_CAP) -> list[Suggestion]:
    """Entity-recognition suggestions in provider rank order."""
    if limit < 0:
        raise ValidationError(f"limit must be >= 0, got {limit}")
    if not text.strip() or limit == 0:
        return []
    try:
        hits = provider.recognize(text)
    except Exception as exc:
        raise ProviderUnavailableError(f"entity provider failed: {exc}") from exc
    return [_suggestion_from_concept(c, score, "text") for c, score in hits[:limit]]


def suggest_from_region(bbox: GeoBBox, provider: GazetteerProvider, limit: int = DISPLAY_CAP) -> list[Suggestion]:
    """Gazetteer suggestions for the region, in provider order.

    Containment is re-checked here, so a misbehaving provider cannot leak
    out-of-box concepts into the pipeline.
    """
    if limit < 0:
        raise ValidationError(f"limit must be >= 0, got {limit}")
    if limit == 0:
        return []
    try:
        hits = provider.within(bbox, limit)
    except Exception as exc:
        raise ProviderUnavailableError(f"gazetteer provider failed: {exc}") from exc
    contained = [c for c in hits if c.geo is not None and bbox.contains(c.geo[0], c.geo[1])]
    return [_suggestion_from_concept(c, REGION_SCORE, "region") for c in contained[:limit]]


def suggest_from_history(graph: TagGraph, rng_seed: int, limit: int = DISPLAY_CAP) -> list[Suggestion]:
    """A seed-deterministic random sample of previously applied tags.

    Draws uniformly, without replacement, from the distinct tags currently
    accepted anywhere in the graph; both label-based and concept-backed
    tags qualify.
    """
    if limit < 0:
        raise ValidationError(f"limit must be >= 0, got {limit}")
    pool = graph.distinct_accepted_tags()
    rng = random.Random(rng_seed)
    picked = rng.sample(pool, min(limit, len(pool)))
    out = []
    for edge in picked:
        concept = graph.concept(edge.concept_uri) if edge.concept_uri else None
        out.append(
            Suggestion(
                label=edge.label,
                score=HISTORY_SCORE,
                origin="history",
                uri=edge.concept_uri,
                abstract=concept.abstract if concept else None,
                geo=concept.geo if concept else None,
                source=concept.source if concept else "",
            )
        )
    return out


def expand_related(concept_uri: str, provider: RelatedProvider, limit: int = DISPLAY_CAP) -> list[Suggestion]:
    """Concepts linked to the given one in the knowledge context."""
    if limit < 0:
        raise ValidationError(f"limit must be >= 0, got {limit}")
    if limit == 0:
        return []
    try:
        hits = provider.related(concept_uri, limit)
    except Exception as exc:
        raise ProviderUnavailableError(f"related-concept provider failed: {exc}") from exc
    expanded = [c for c in hits if c.uri != concept_uri]
    return [_suggestion_from_concept(c, RELATED_SCORE, "related") for c in expanded[:limit]]


def merge_suggestions(
    lists: Iterable[Sequence[Suggestion]],
    cap: int = DISPLAY_CAP,
    exclude: Iterable[str] = (),
) -> list[Suggestion]:
    """Merge source lists into one display list.

    Deduplicates by key keeping the highest-scoring entry, drops keys the
    user has already judged on the target (pass them via `exclude`), orders
    by score descending then label then key ascending, and cuts off at
    `cap` (the display limit, 15 by default).
    """
    if cap < 0:
        raise ValidationError(f"cap must be >= 0, got {cap}")
    excluded = set(exclude)
    best: dict[str, Suggestion] = {}
    for suggestions in lists:
        for s in suggestions:
            if s.key in excluded:
                continue
            current = best.get(s.key)
            if current is None or s.score > current.score:
                best[s.key] = s
    merged = sorted(best.values(), key=lambda s: (-s.score, s.label, s.key))
    return merged[:cap]
