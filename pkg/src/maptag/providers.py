"""Offline knowledge-context providers backed by a bundled concept file.

One fixture file feeds all three provider interfaces, so the whole system
runs and tests hermetically with no network access. The file format is
versioned and documented in docs/fixtures.md: a JSON object with a
``version`` field and a ``concepts`` array of records
``{uri, label, abstract?, lon?, lat?, links: [uri, ...]}``.

Entity recognition here is deliberately simple: a concept is recognized
when its label occurs in the text at a word boundary, and hits are ranked
by first occurrence. Live deployments swap in real services via the same
provider interfaces (see maptag.live).
"""

from __future__ import annotations

import json
import re
from importlib.resources import files
from pathlib import Path

from .errors import ValidationError
from .geo import GeoBBox
from .graph import KnowledgeResource

FIXTURE_VERSION = 1

# Canned annotation text used by demos and tests; every mentioned place
# exists in the bundled concept file.
GIBRALTAR_SAMPLE_TEXT = (
    "The narrow passage at the Strait of Gibraltar joins the Atlantic Ocean "
    "to the Mediterranean Sea and separates Spain and Gibraltar from Tangier "
    "and the coast of Morocco. Ferries from Algeciras and Tarifa cross it daily."
)


def fixture_path(name: str) -> Path:
    """Path of a bundled fixture data file."""
    return Path(str(files("maptag").joinpath("fixtures", name)))


class FixtureKnowledgeContext:
    """Deterministic in-memory knowledge context.

    Implements all three provider interfaces used by the suggestion
    pipelines: recognize (entity recognition), within (gazetteer), and
    related (concept links).
    """

    def __init__(self, concepts: list[KnowledgeResource], links: dict[str, list[str]]):
        self.concepts = list(concepts)
        self._by_uri = {c.uri: c for c in concepts}
        self._links = links
        self._patterns = [
            (c, re.compile(rf"\b{re.escape(c.label)}\b", re.IGNORECASE)) for c in self.concepts
        ]

    @classmethod
    def from_file(cls, path: str | Path | None = None) -> "FixtureKnowledgeContext":
        raw = json.loads(Path(path or fixture_path("concepts.json")).read_text(encoding="utf-8"))
        if raw.get("version") != FIXTURE_VERSION:
            raise ValidationError(f"unsupported fixture version: {raw.get('version')!r}")
        concepts = []
        links = {}
        for rec in raw["concepts"]:
            geo = None
            if "lon" in rec and "lat" in rec:
                geo = (float(rec["lon"]), float(rec["lat"]))
            concepts.append(
                KnowledgeResource(
                    uri=rec["uri"],
                    label=rec["label"],
                    abstract=rec.get("abstract"),
                    source="fixture",
                    geo=geo,
                )
            )
            links[rec["uri"]] = list(rec.get("links", []))
        return cls(concepts, links)

    def concept(self, uri: str) -> KnowledgeResource | None:
        return self._by_uri.get(uri)

    # -- EntityProvider -------------------------------------------------------

    def recognize(self, text: str) -> list[tuple[KnowledgeResource, float]]:
        """Concepts whose label appears in the text, earliest mention first.

        Scores fall linearly with rank so they are non-increasing and stay
        inside (0, 1].
        """
        hits = []
        for concept, pattern in self._patterns:
            match = pattern.search(text)
            if match:
                hits.append((match.start(), concept.label, concept))
        hits.sort(key=lambda h: (h[0], h[1]))
        total = len(hits)
        return [(c, (total - i) / total) for i, (_, _, c) in enumerate(hits)]

    # -- GazetteerProvider ------------------------------------------------------

    def within(self, bbox: GeoBBox, limit: int) -> list[KnowledgeResource]:
        """Geo-located concepts inside the box, in fixture file order."""
        found = [
            c
            for c in self.concepts
            if c.geo is not None and bbox.contains(c.geo[0], c.geo[1])
        ]
        return found[:limit]

    # -- RelatedProvider --------------------------------------------------------

    def related(self, concept_uri: str, limit: int) -> list[KnowledgeResource]:
        """Linked concepts, with unknown URIs and self-links dropped."""
        out = []
        for uri in self._links.get(concept_uri, ()):
            if uri == concept_uri:
                continue
            linked = self._by_uri.get(uri)
            if linked is not None:
                out.append(linked)
        return out[:limit]


def load_knowledge_context(path: str | Path | None = None) -> FixtureKnowledgeContext:
    """The bundled fixture context, or one loaded from a caller-supplied file."""
    return FixtureKnowledgeContext.from_file(path)
