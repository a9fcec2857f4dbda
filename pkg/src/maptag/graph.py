"""Qualified tagging-relationship graph.

Users attach tags to target resources. A tag is either a concept from a
knowledge context (identified by URI, carrying a label and optional
abstract) or a bare text label for plain label-based tagging. Every edge
carries a polarity: accepted, rejected, or neutral. One current polarity
exists per (user, tag, target); re-recording upserts. The full history goes
to an append-only newline-delimited event log from which the edge state can
be replayed.

Bare-label edges can never be rejected: a label is only ever entered by its
own user, so there is nothing to reject, and a negative judgment without a
concept resource behind it has no defined referent. Rejections therefore
require a concept URI.
"""

from __future__ import annotations

import json
import os
import threading
from collections import Counter
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable
from urllib.parse import urlparse

from .errors import NotFoundError, ValidationError


class Polarity(str, Enum):
    ACCEPTED = "accepted"
    REJECTED = "rejected"
    NEUTRAL = "neutral"


class Origin(str, Enum):
    MANUAL = "manual"
    TEXT_SUGGESTION = "text-suggestion"
    REGION_SUGGESTION = "region-suggestion"
    HISTORY_SUGGESTION = "history-suggestion"


RESOURCE_KINDS = ("annotation", "map", "concept")


def _require_absolute_uri(uri: str) -> str:
    parsed = urlparse(uri)
    if not parsed.scheme or not (parsed.netloc or parsed.path):
        raise ValidationError(f"not an absolute URI: {uri!r}")
    return uri


def is_absolute_uri(text: str) -> bool:
    parsed = urlparse(text)
    return bool(parsed.scheme) and bool(parsed.netloc or parsed.path)


@dataclass(frozen=True)
class UserRef:
    """Stable opaque user identity plus a display name."""

    id: str
    display_name: str = ""

    def __post_init__(self):
        if not self.id:
            raise ValidationError("user id must be non-empty")


@dataclass(frozen=True)
class ResourceRef:
    """A URI-identified node: an annotation, a map, or a concept."""

    uri: str
    kind: str

    def __post_init__(self):
        _require_absolute_uri(self.uri)
        if self.kind not in RESOURCE_KINDS:
            raise ValidationError(f"unknown resource kind {self.kind!r}")


@dataclass(frozen=True)
class KnowledgeResource:
    """A concept definition drawn from a knowledge context.

    geo, when present, is a (lon, lat) pair in degrees.
    """

    uri: str
    label: str
    abstract: str | None = None
    source: str = ""
    geo: tuple[float, float] | None = None

    def __post_init__(self):
        _require_absolute_uri(self.uri)
        if not self.label:
            raise ValidationError(f"concept {self.uri} needs a non-empty label")


@dataclass
class TagRelationship:
    """One user's current judgment connecting a tag to a target resource."""

    id: str
    user_id: str
    concept_uri: str | None
    label: str
    target_uri: str
    polarity: Polarity
    origin: Origin
    created_at: str
    coding: dict | None = None

    @property
    def key(self) -> str:
        """Canonical tag key: the concept URI, or the lowercased label."""
        return self.concept_uri if self.concept_uri else self.label.lower()

    @property
    def display(self) -> str:
        return self.concept_uri if self.concept_uri else self.label


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat().replace("+00:00", "Z")


class TagGraph:
    """In-memory tagging graph with an optional persistent event log.

    Mutations are serialized by an internal lock; reads return fresh
    containers so concurrent readers never observe partial updates.
    """

    def __init__(self, event_log_path: str | Path | None = None, clock: Callable[[], str] | None = None):
        self._lock = threading.RLock()
        self._clock = clock or _utc_now
        self._users: dict[str, UserRef] = {}
        self._resources: dict[str, ResourceRef] = {}
        self._concepts: dict[str, KnowledgeResource] = {}
        self._edges: dict[tuple[str, str, str], TagRelationship] = {}
        self._edges_by_id: dict[str, TagRelationship] = {}
        self._next_edge = 0
        self._log_path = Path(event_log_path) if event_log_path else None
        if self._log_path is not None:
            self._log_path.parent.mkdir(parents=True, exist_ok=True)
            if self._log_path.exists():
                with self._log_path.open(encoding="utf-8") as fh:
                    self.replay(fh, _append=False)
            self._load_codings()

    # -- registries ----------------------------------------------------------

    def add_user(self, user: UserRef) -> UserRef:
        with self._lock:
            self._users[user.id] = user
        return user

    def has_user(self, user_id: str) -> bool:
        return user_id in self._users

    def add_resource(self, ref: ResourceRef) -> ResourceRef:
        with self._lock:
            self._resources[ref.uri] = ref
        return ref

    def has_resource(self, uri: str) -> bool:
        return uri in self._resources

    def register_concept(self, concept: KnowledgeResource) -> None:
        with self._lock:
            self._concepts[concept.uri] = concept
            self._resources.setdefault(concept.uri, ResourceRef(uri=concept.uri, kind="concept"))

    def concept(self, uri: str) -> KnowledgeResource | None:
        return self._concepts.get(uri)

    # -- edge recording --------------------------------------------------------

    def record_relationship(
        self,
        user: UserRef | str,
        concept: KnowledgeResource | ResourceRef | str,
        target: ResourceRef | str,
        polarity: Polarity | str,
        origin: Origin | str = Origin.MANUAL,
    ) -> TagRelationship:
        """Upsert the (user, tag, target) edge with a new polarity.

        `concept` may be a KnowledgeResource, a concept ResourceRef, or a
        plain string which is always treated as a literal label (URIs must
        be wrapped to count as concepts).
        """
        return self._record(user, concept, target, polarity, origin, edge_id=None, append=True)

    def _record(
        self,
        user: UserRef | str,
        concept: KnowledgeResource | ResourceRef | str,
        target: ResourceRef | str,
        polarity: Polarity | str,
        origin: Origin | str,
        edge_id: str | None,
        append: bool,
    ) -> TagRelationship:
        polarity = Polarity(polarity)
        origin = Origin(origin)
        user = user if isinstance(user, UserRef) else UserRef(id=user)
        target_uri = target.uri if isinstance(target, ResourceRef) else target

        concept_uri: str | None
        if isinstance(concept, KnowledgeResource):
            concept_uri, label = concept.uri, concept.label
        elif isinstance(concept, ResourceRef):
            if concept.kind != "concept":
                raise ValidationError(f"tag resource must have kind 'concept', got {concept.kind!r}")
            concept_uri, label = concept.uri, concept.uri
        else:
            concept_uri, label = None, str(concept)
            if not label.strip():
                raise ValidationError("literal label must be non-empty")
            if is_absolute_uri(label):
                raise ValidationError(f"literal label looks like a URI: {label!r}; wrap it as a concept")

        if concept_uri is None and polarity is Polarity.REJECTED:
            raise ValidationError(f"label tag {label!r} cannot be rejected; only concept tags can")

        with self._lock:
            if target_uri not in self._resources:
                raise NotFoundError(f"unknown target resource: {target_uri}")
            self._users.setdefault(user.id, user)
            if isinstance(concept, KnowledgeResource):
                self.register_concept(concept)
            elif isinstance(concept, ResourceRef):
                self._resources.setdefault(concept.uri, concept)

            key = (user.id, concept_uri if concept_uri else label.lower(), target_uri)
            edge = self._edges.get(key)
            if edge is None:
                if edge_id is None:
                    edge_id = f"e{self._next_edge}"
                if edge_id.startswith("e") and edge_id[1:].isdigit():
                    self._next_edge = max(self._next_edge, int(edge_id[1:]) + 1)
                edge = TagRelationship(
                    id=edge_id,
                    user_id=user.id,
                    concept_uri=concept_uri,
                    label=label,
                    target_uri=target_uri,
                    polarity=polarity,
                    origin=origin,
                    created_at=self._clock(),
                )
                self._edges[key] = edge
                self._edges_by_id[edge.id] = edge
            else:
                edge.polarity = polarity
                edge.origin = origin
            if append:
                self._append_event(edge)
            return edge

    def _append_event(self, edge: TagRelationship) -> None:
        if self._log_path is None:
            return
        record = {
            "id": edge.id,
            "user": edge.user_id,
            "concept_uri_or_label": edge.concept_uri if edge.concept_uri else edge.label,
            "target_uri": edge.target_uri,
            "polarity": edge.polarity.value,
            "origin": edge.origin.value,
            "timestamp": self._clock(),
        }
        with self._log_path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(record, sort_keys=True) + "\n")

    def replay(self, lines: Iterable[str], _append: bool = False) -> None:
        """Apply logged events in order, registering unseen targets as they appear.

        Replay preserves logged edge ids and does not write back to the log.
        """
        for raw in lines:
            line = raw.strip()
            if not line:
                continue
            rec = json.loads(line)
            tag = rec["concept_uri_or_label"]
            concept: KnowledgeResource | ResourceRef | str
            if is_absolute_uri(tag):
                known = self._concepts.get(tag)
                concept = known if known else ResourceRef(uri=tag, kind="concept")
            else:
                concept = tag
            with self._lock:
                if rec["target_uri"] not in self._resources:
                    self._resources[rec["target_uri"]] = ResourceRef(uri=rec["target_uri"], kind="annotation")
            self._record(
                user=UserRef(id=rec["user"]),
                concept=concept,
                target=rec["target_uri"],
                polarity=rec["polarity"],
                origin=rec["origin"],
                edge_id=rec["id"],
                append=_append,
            )

    # -- queries -----------------------------------------------------------

    def _require_target(self, target: ResourceRef | str) -> str:
        uri = target.uri if isinstance(target, ResourceRef) else target
        if uri not in self._resources:
            raise NotFoundError(f"unknown target resource: {uri}")
        return uri

    def _polarity_edges(self, target_uri: str, polarity: Polarity) -> list[TagRelationship]:
        with self._lock:
            return [e for e in self._edges.values() if e.target_uri == target_uri and e.polarity is polarity]

    def positive_set(self, target: ResourceRef | str) -> set[str]:
        """Concepts (URIs, or labels for label tags) currently accepted on the target."""
        uri = self._require_target(target)
        return {e.display for e in self._polarity_edges(uri, Polarity.ACCEPTED)}

    def negative_set(self, target: ResourceRef | str) -> set[str]:
        """Concept URIs currently rejected on the target."""
        uri = self._require_target(target)
        return {e.display for e in self._polarity_edges(uri, Polarity.REJECTED)}

    def attributions(self, target: ResourceRef | str, polarity: Polarity | str) -> dict[str, list[str]]:
        """Per-tag lists of user ids holding the given polarity on the target."""
        uri = self._require_target(target)
        result: dict[str, list[str]] = {}
        for e in self._polarity_edges(uri, Polarity(polarity)):
            result.setdefault(e.display, []).append(e.user_id)
        return {k: sorted(v) for k, v in result.items()}

    def relevance_judgments(self) -> list[tuple[str, str, int]]:
        """(tag, target, +1/-1) rows, one per current non-neutral edge.

        Ordered by target URI, then tag, then user id, so exports are stable.
        """
        rows = []
        with self._lock:
            edges = list(self._edges.values())
        for e in edges:
            if e.polarity is Polarity.NEUTRAL:
                continue
            sign = 1 if e.polarity is Polarity.ACCEPTED else -1
            rows.append((e.target_uri, e.display, e.user_id, sign))
        rows.sort()
        return [(tag, target, sign) for target, tag, _user, sign in rows]

    def cooccurring_concepts(self, user: UserRef | str, limit: int | None = None) -> list[str]:
        """Tags accepted by the user or their co-taggers, by acceptance count.

        Co-taggers are users sharing at least one accepted target with the
        given user. Ties break by label, then key, ascending.
        """
        user_id = user.id if isinstance(user, UserRef) else user
        if user_id not in self._users:
            raise NotFoundError(f"unknown user: {user_id}")
        with self._lock:
            accepted = [e for e in self._edges.values() if e.polarity is Polarity.ACCEPTED]
        own_targets = {e.target_uri for e in accepted if e.user_id == user_id}
        cohort = {user_id} | {e.user_id for e in accepted if e.target_uri in own_targets}
        counts: Counter[str] = Counter()
        labels: dict[str, str] = {}
        for e in accepted:
            if e.user_id in cohort:
                counts[e.display] += 1
                labels[e.display] = self._label_for(e)
        ranked = sorted(counts, key=lambda c: (-counts[c], labels[c], c))
        return ranked[:limit] if limit is not None else ranked

    def _label_for(self, edge: TagRelationship) -> str:
        if edge.concept_uri and edge.concept_uri in self._concepts:
            return self._concepts[edge.concept_uri].label
        return edge.label

    def distinct_accepted_tags(self) -> list[TagRelationship]:
        """One representative edge per distinct currently-accepted tag key.

        This is the pool history-based suggestion draws from: tags some user
        actually applied, not ones merely shown or rejected.
        """
        with self._lock:
            edges = sorted(self._edges.values(), key=lambda e: e.id)
        seen: dict[str, TagRelationship] = {}
        for e in edges:
            if e.polarity is Polarity.ACCEPTED and e.key not in seen:
                seen[e.key] = e
        return [seen[k] for k in sorted(seen)]

    def edge_count(self) -> int:
        return len(self._edges)

    def polarity_counts(self) -> dict[str, int]:
        with self._lock:
            counts = Counter(e.polarity.value for e in self._edges.values())
        return {p.value: counts.get(p.value, 0) for p in Polarity}

    def edges_for_target(self, target: ResourceRef | str) -> list[TagRelationship]:
        uri = self._require_target(target)
        with self._lock:
            return sorted((e for e in self._edges.values() if e.target_uri == uri), key=lambda e: e.id)

    def edge_state(self) -> dict[tuple[str, str, str], tuple[str, str]]:
        """Snapshot of (user, tag key, target) -> (polarity, origin), for replay checks."""
        with self._lock:
            return {k: (e.polarity.value, e.origin.value) for k, e in self._edges.items()}

    # -- human coding ----------------------------------------------------------

    def code_relationship(self, edge_id: str, type_code: str, category_code: str) -> TagRelationship:
        """Attach human coder judgments to an edge. Pure data, no behavior."""
        from .stats import CATEGORY_CODES, TYPE_CODES

        if type_code not in TYPE_CODES:
            raise ValidationError(f"unknown type code {type_code!r}")
        if category_code not in CATEGORY_CODES:
            raise ValidationError(f"unknown category code {category_code!r}")
        with self._lock:
            edge = self._edges_by_id.get(edge_id)
            if edge is None:
                raise NotFoundError(f"unknown relationship id: {edge_id}")
            edge.coding = {"type": type_code, "category": category_code}
            self._save_codings()
            return edge

    def _codings_path(self) -> Path | None:
        if self._log_path is None:
            return None
        return self._log_path.with_name("codings.json")

    def _save_codings(self) -> None:
        path = self._codings_path()
        if path is None:
            return
        payload = {e.id: e.coding for e in self._edges_by_id.values() if e.coding}
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(payload, sort_keys=True, indent=1), encoding="utf-8")
        os.replace(tmp, path)

    def _load_codings(self) -> None:
        path = self._codings_path()
        if path is None or not path.exists():
            return
        payload = json.loads(path.read_text(encoding="utf-8"))
        for edge_id, coding in payload.items():
            edge = self._edges_by_id.get(edge_id)
            if edge is not None:
                edge.coding = coding
