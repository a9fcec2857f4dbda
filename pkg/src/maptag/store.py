"""Maps, annotations, tri-state tags, persistence, search, and export.

An annotation marks a polygonal pixel region of a map, carries one free-text
comment, and accumulates tags. Tags are tri-state: suggested tags start
neutral, clicking cycles neutral -> accepted -> rejected -> neutral.
Label-only tags (no concept URI) skip the rejected state, cycling
accepted <-> neutral instead, because a rejected bare label is not
representable in the tagging graph; see maptag.graph.

Each annotation session runs under one tagging condition which gates the
tag entry paths:

    LT       manual comma-separated label entry only, no suggestions
    ST       history suggestions only
    SMT      text and region suggestions
    SMT_CTX  like SMT, with concept abstracts exposed to the client

Tag state changes and graph polarity updates happen under one lock as a
single atomic unit, so the two structures can never disagree.

Persistence is one JSON document per entity, written atomically (temp file
+ rename) into a data directory; in-memory indexes are rebuilt on startup.
Annotations additionally serialize to a canonical, dereferenceable export
document described in docs/annotation-format.md.
"""

from __future__ import annotations

import json
import os
import re
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .errors import NotFoundError, ValidationError
from .geo import ControlPoint, GeoPoint, GeoTransform, PixelPoint, fit_transform
from .graph import KnowledgeResource, Origin, Polarity, ResourceRef, TagGraph, UserRef
from .suggest import DISPLAY_CAP, Suggestion


class Condition(str, Enum):
    LT = "LT"
    ST = "ST"
    SMT = "SMT"
    SMT_CTX = "SMT_CTX"


# Suggestion origin -> relationship origin. Related-concept expansions ride
# in on the text pipeline, so they are recorded as text suggestions.
_REL_ORIGIN = {
    "text": Origin.TEXT_SUGGESTION,
    "region": Origin.REGION_SUGGESTION,
    "history": Origin.HISTORY_SUGGESTION,
    "related": Origin.TEXT_SUGGESTION,
}


@dataclass
class MapRecord:
    """A raster map with its metadata and georeferencing control points."""

    id: str
    title: str
    image_uri: str
    width: int
    height: int
    metadata: dict[str, str] = field(default_factory=dict)
    control_points: list[ControlPoint] = field(default_factory=list)

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValidationError(f"map {self.id}: width and height must be positive")


@dataclass
class TagState:
    """One tag chip on an annotation."""

    key: str
    label: str
    state: Polarity
    origin: Origin
    created_at: str
    uri: str | None = None
    abstract: str | None = None

    @property
    def is_concept(self) -> bool:
        return self.uri is not None


@dataclass
class Annotation:
    """A shape on a map plus a comment and its tag states.

    `seq` is the store-assigned creation sequence number; it keeps
    creation order stable even when timestamps collide.
    """

    id: str
    uri: str
    map_id: str
    shape: list[PixelPoint]
    body_text: str
    creator: UserRef
    condition: Condition
    created_at: str
    seq: int = 0
    tags: dict[str, TagState] = field(default_factory=dict)

    def accepted_count(self) -> int:
        return sum(1 for t in self.tags.values() if t.state is Polarity.ACCEPTED)

    def rejected_count(self) -> int:
        return sum(1 for t in self.tags.values() if t.state is Polarity.REJECTED)


@dataclass(frozen=True)
class SearchHit:
    kind: str  # "map" or "annotation"
    id: str
    matched_in: str  # "metadata", "body", or "tag"


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat().replace("+00:00", "Z")


def next_tag_state(tag: TagState) -> Polarity:
    """The state one click ahead of the current one.

    Concept tags walk the full neutral -> accepted -> rejected -> neutral
    cycle; label-only tags toggle neutral <-> accepted.
    """
    if tag.is_concept:
        order = (Polarity.NEUTRAL, Polarity.ACCEPTED, Polarity.REJECTED)
        return order[(order.index(tag.state) + 1) % 3]
    return Polarity.NEUTRAL if tag.state is Polarity.ACCEPTED else Polarity.ACCEPTED


# -- well-known-text pixel polygons -------------------------------------------

def polygon_to_wkt(shape: Sequence[PixelPoint]) -> str:
    ring = list(shape) + [shape[0]]
    coords = ", ".join(f"{repr(float(p.x))} {repr(float(p.y))}" for p in ring)
    return f"POLYGON (({coords}))"


_WKT_RE = re.compile(r"^POLYGON \(\((.+)\)\)$")


def wkt_to_polygon(wkt: str) -> list[PixelPoint]:
    match = _WKT_RE.match(wkt.strip())
    if not match:
        raise ValidationError(f"not a pixel polygon WKT: {wkt!r}")
    points = []
    for pair in match.group(1).split(","):
        x, y = pair.split()
        points.append(PixelPoint(float(x), float(y)))
    if len(points) < 2 or points[0] != points[-1]:
        raise ValidationError("polygon WKT ring must close on its first vertex")
    return points[:-1]


# -- canonical export document -------------------------------------------------

DOCUMENT_FORMAT = "open-map-annotation/1"


def annotation_document(annotation: Annotation, map_uri: str) -> dict:
    """The dereferenceable export document for an annotation.

    One text body plus one tag body per non-neutral tag. Tag bodies carry
    the display label always and the concept URI when the tag is
    concept-backed; neutral chips are interface state, not published data.
    """
    bodies: list[dict] = [{"type": "text", "value": annotation.body_text}]
    published = [t for t in annotation.tags.values() if t.state is not Polarity.NEUTRAL]
    for tag in sorted(published, key=lambda t: (t.label.lower(), t.key)):
        body = {
            "type": "tag",
            "label": tag.label,
            "polarity": tag.state.value,
            "creator": annotation.creator.id,
            "created_at": tag.created_at,
        }
        if tag.uri:
            body["concept"] = tag.uri
        bodies.append(body)
    return {
        "format": DOCUMENT_FORMAT,
        "id": annotation.id,
        "uri": annotation.uri,
        "created_at": annotation.created_at,
        "creator": {"id": annotation.creator.id, "display_name": annotation.creator.display_name},
        "condition": annotation.condition.value,
        "target": {
            "map": map_uri,
            "selector": {"type": "pixel-polygon-wkt", "value": polygon_to_wkt(annotation.shape)},
        },
        "body": bodies,
    }


def canonical_bytes(doc: dict) -> bytes:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def parse_open_annotation(data: bytes | str) -> tuple[Annotation, str]:
    """Rebuild an annotation from its export document.

    Returns (annotation, map_uri). Only non-neutral tags exist in the
    document, and it does not carry suggestion provenance, so parsed tag
    states come back with origin "manual".
    """
    doc = json.loads(data if isinstance(data, str) else data.decode("utf-8"))
    if doc.get("format") != DOCUMENT_FORMAT:
        raise ValidationError(f"unsupported document format: {doc.get('format')!r}")
    map_uri = doc["target"]["map"]
    shape = wkt_to_polygon(doc["target"]["selector"]["value"])
    creator = UserRef(id=doc["creator"]["id"], display_name=doc["creator"].get("display_name", ""))
    annotation = Annotation(
        id=doc["id"],
        uri=doc["uri"],
        map_id=map_uri.rstrip("/").rsplit("/", 1)[-1],
        shape=shape,
        body_text="",
        creator=creator,
        condition=Condition(doc["condition"]),
        created_at=doc["created_at"],
    )
    for body in doc["body"]:
        if body["type"] == "text":
            annotation.body_text = body["value"]
            continue
        uri = body.get("concept")
        key = uri if uri else body["label"].lower()
        annotation.tags[key] = TagState(
            key=key,
            label=body["label"],
            state=Polarity(body["polarity"]),
            origin=Origin.MANUAL,
            created_at=body["created_at"],
            uri=uri,
        )
    return annotation, map_uri


# -- the store -----------------------------------------------------------------

class AnnotationStore:
    """Owns maps and annotations; mirrors tag judgments into a TagGraph.

    With a data directory every mutation is persisted immediately; without
    one the store is purely in-memory (handy for tests and demos).
    """

    def __init__(
        self,
        data_dir: str | Path | None = None,
        graph: TagGraph | None = None,
        base_uri: str = "http://localhost:8764",
        id_factory: Callable[[], str] | None = None,
        clock: Callable[[], str] | None = None,
        suggestion_cap: int = DISPLAY_CAP,
    ):
        self._lock = threading.RLock()
        self._dir = Path(data_dir) if data_dir else None
        self._clock = clock or _utc_now
        self._ids = id_factory or (lambda: uuid.uuid4().hex)
        self.base_uri = base_uri.rstrip("/")
        self.suggestion_cap = suggestion_cap
        if graph is not None:
            self.graph = graph
        elif self._dir is not None:
            self.graph = TagGraph(event_log_path=self._dir / "graph" / "events.log", clock=self._clock)
        else:
            self.graph = TagGraph(clock=self._clock)
        self._maps: dict[str, MapRecord] = {}
        self._annotations: dict[str, Annotation] = {}
        self._next_seq = 0
        if self._dir is not None:
            (self._dir / "maps").mkdir(parents=True, exist_ok=True)
            (self._dir / "annotations").mkdir(parents=True, exist_ok=True)
            self._load()

    # -- uris -------------------------------------------------------------

    def map_uri(self, map_id: str) -> str:
        return f"{self.base_uri}/maps/{map_id}"

    def annotation_uri(self, annotation_id: str) -> str:
        return f"{self.base_uri}/annotations/{annotation_id}"

    # -- maps -------------------------------------------------------------

    def add_map(self, record: MapRecord | dict) -> MapRecord:
        if isinstance(record, dict):
            known = {"id", "title", "image_uri", "width", "height", "metadata", "control_points"}
            extra = {k: str(v) for k, v in record.items() if k not in known}
            points = [
                ControlPoint(
                    pixel=PixelPoint(float(cp["px"]), float(cp["py"])),
                    geo=GeoPoint(lon=float(cp["lon"]), lat=float(cp["lat"])),
                    label=cp.get("label"),
                )
                for cp in record.get("control_points", [])
            ]
            record = MapRecord(
                id=str(record["id"]),
                title=record.get("title", ""),
                image_uri=record.get("image_uri", ""),
                width=int(record["width"]),
                height=int(record["height"]),
                metadata={**record.get("metadata", {}), **extra},
                control_points=points,
            )
        with self._lock:
            self._maps[record.id] = record
            self.graph.add_resource(ResourceRef(uri=self.map_uri(record.id), kind="map"))
            self._persist_map(record)
        return record

    def get_map(self, map_id: str) -> MapRecord:
        try:
            return self._maps[map_id]
        except KeyError:
            raise NotFoundError(f"unknown map: {map_id}") from None

    def maps(self) -> list[MapRecord]:
        return [self._maps[k] for k in sorted(self._maps)]

    def add_control_points(self, map_id: str, points: Iterable[ControlPoint]) -> MapRecord:
        with self._lock:
            record = self.get_map(map_id)
            record.control_points.extend(points)
            self._persist_map(record)
            return record

    def transform_for(self, map_id: str) -> GeoTransform:
        """Fit the current affine transform from the map's control points."""
        return fit_transform(self.get_map(map_id).control_points)

    # -- annotations ------------------------------------------------------

    def create_annotation(
        self,
        map_id: str,
        shape: Sequence[PixelPoint | tuple[float, float]],
        body_text: str,
        creator: UserRef,
        condition: Condition | str,
    ) -> Annotation:
        condition = Condition(condition)
        record = self.get_map(map_id)
        points = [p if isinstance(p, PixelPoint) else PixelPoint(float(p[0]), float(p[1])) for p in shape]
        if len(points) == 0:
            raise ValidationError("annotation shape is empty")
        if len(points) < 3 or len({(p.x, p.y) for p in points}) < 3:
            raise ValidationError("annotation shape needs at least 3 distinct vertices")
        for p in points:
            if not (0 <= p.x <= record.width and 0 <= p.y <= record.height):
                raise ValidationError(
                    f"vertex ({p.x}, {p.y}) outside map bounds {record.width}x{record.height}"
                )
        with self._lock:
            ann_id = self._ids()
            if ann_id in self._annotations:
                raise ValidationError(f"annotation id collision: {ann_id}")
            annotation = Annotation(
                id=ann_id,
                uri=self.annotation_uri(ann_id),
                map_id=map_id,
                shape=points,
                body_text=body_text,
                creator=creator,
                condition=condition,
                created_at=self._clock(),
                seq=self._next_seq,
            )
            self._next_seq += 1
            self._annotations[ann_id] = annotation
            self.graph.add_user(creator)
            self.graph.add_resource(ResourceRef(uri=annotation.uri, kind="annotation"))
            self._persist_annotation(annotation)
            return annotation

    def get_annotation(self, annotation_id: str) -> Annotation:
        try:
            return self._annotations[annotation_id]
        except KeyError:
            raise NotFoundError(f"unknown annotation: {annotation_id}") from None

    def annotations(self) -> list[Annotation]:
        return sorted(self._annotations.values(), key=lambda a: a.seq)

    def annotation_count(self) -> int:
        return len(self._annotations)

    # -- tagging ------------------------------------------------------------

    def set_body_text(self, annotation_id: str, text: str) -> Annotation:
        """Replace the annotation's comment text (draft composition flow)."""
        with self._lock:
            annotation = self.get_annotation(annotation_id)
            annotation.body_text = text
            self._persist_annotation(annotation)
            return annotation

    def add_label_tags(self, annotation_id: str, raw: str) -> list[TagState]:
        """Manual comma-separated label entry; permitted under LT only.

        Labels are trimmed, empties dropped, and duplicates (case-insensitive,
        including against existing tags) skipped. Each label becomes an
        accepted tag immediately; manual entry is not subject to the
        suggestion display cap.
        """
        with self._lock:
            annotation = self.get_annotation(annotation_id)
            if annotation.condition is not Condition.LT:
                raise ValidationError(
                    f"condition {annotation.condition.value} does not permit manual label entry"
                )
            added = []
            for piece in raw.split(","):
                label = piece.strip()
                if not label or label.lower() in annotation.tags:
                    continue
                created = self._clock()
                self.graph.record_relationship(
                    annotation.creator, label, annotation.uri, Polarity.ACCEPTED, Origin.MANUAL
                )
                tag = TagState(
                    key=label.lower(),
                    label=label,
                    state=Polarity.ACCEPTED,
                    origin=Origin.MANUAL,
                    created_at=created,
                )
                annotation.tags[tag.key] = tag
                added.append(tag)
            if added:
                self._persist_annotation(annotation)
            return added

    def attach_suggestions(self, annotation_id: str, suggestions: Iterable[Suggestion]) -> list[TagState]:
        """Attach suggestions as neutral chips; not permitted under LT.

        Duplicates of existing tag keys are skipped and attachment stops
        once the annotation shows `suggestion_cap` tags (15 by default).
        """
        with self._lock:
            annotation = self.get_annotation(annotation_id)
            if annotation.condition is Condition.LT:
                raise ValidationError("condition LT shows no suggestions")
            attached = []
            for s in suggestions:
                if len(annotation.tags) >= self.suggestion_cap:
                    break
                if s.key in annotation.tags:
                    continue
                concept = (
                    KnowledgeResource(uri=s.uri, label=s.label, abstract=s.abstract, source=s.source, geo=s.geo)
                    if s.uri
                    else s.label
                )
                created = self._clock()
                self.graph.record_relationship(
                    annotation.creator, concept, annotation.uri, Polarity.NEUTRAL, _REL_ORIGIN[s.origin]
                )
                tag = TagState(
                    key=s.key,
                    label=s.label,
                    state=Polarity.NEUTRAL,
                    origin=_REL_ORIGIN[s.origin],
                    created_at=created,
                    uri=s.uri,
                    abstract=s.abstract,
                )
                annotation.tags[tag.key] = tag
                attached.append(tag)
            if attached:
                self._persist_annotation(annotation)
            return attached

    def cycle_tag_state(self, annotation_id: str, tag_key: str) -> TagState:
        """Advance a tag one click; store state and graph polarity move together."""
        with self._lock:
            annotation = self.get_annotation(annotation_id)
            tag = annotation.tags.get(tag_key)
            if tag is None:
                raise NotFoundError(f"annotation {annotation_id} has no tag {tag_key!r}")
            return self._set_state(annotation, tag, next_tag_state(tag))

    def set_tag_state(self, annotation_id: str, tag_key: str, state: Polarity | str) -> TagState:
        """Explicitly set a tag state; label-only tags still cannot be rejected."""
        with self._lock:
            annotation = self.get_annotation(annotation_id)
            tag = annotation.tags.get(tag_key)
            if tag is None:
                raise NotFoundError(f"annotation {annotation_id} has no tag {tag_key!r}")
            return self._set_state(annotation, tag, Polarity(state))

    def _set_state(self, annotation: Annotation, tag: TagState, state: Polarity) -> TagState:
        concept: KnowledgeResource | str
        if tag.uri:
            concept = KnowledgeResource(uri=tag.uri, label=tag.label, abstract=tag.abstract)
        else:
            concept = tag.label
        # Graph first: it validates, and on failure the chip stays untouched.
        self.graph.record_relationship(annotation.creator, concept, annotation.uri, state, tag.origin)
        tag.state = state
        self._persist_annotation(annotation)
        return tag

    # -- search ---------------------------------------------------------------

    def search(self, query: str) -> list[SearchHit]:
        """Case-insensitive substring search over metadata, bodies, and tags.

        Tag labels only count once the user accepted them; neutral chips and
        rejections are not user-contributed content. Hits order by kind
        (maps first), then id.
        """
        needle = query.strip().lower()
        if not needle:
            return []
        hits = []
        for map_id in sorted(self._maps):
            record = self._maps[map_id]
            haystacks = [record.title, *record.metadata.values()]
            if any(needle in h.lower() for h in haystacks):
                hits.append(SearchHit(kind="map", id=map_id, matched_in="metadata"))
        for annotation in sorted(self._annotations.values(), key=lambda a: a.id):
            if needle in annotation.body_text.lower():
                hits.append(SearchHit(kind="annotation", id=annotation.id, matched_in="body"))
                continue
            accepted_labels = (
                t.label for t in annotation.tags.values() if t.state is Polarity.ACCEPTED
            )
            if any(needle in label.lower() for label in accepted_labels):
                hits.append(SearchHit(kind="annotation", id=annotation.id, matched_in="tag"))
        return hits

    # -- export ------------------------------------------------------------------

    def serialize_open_annotation(self, annotation_id: str) -> bytes:
        """Canonical export bytes; GET responses serve exactly these."""
        annotation = self.get_annotation(annotation_id)
        doc = annotation_document(annotation, self.map_uri(annotation.map_id))
        return canonical_bytes(doc)

    # -- stats feeds --------------------------------------------------------------

    def annotation_tag_tallies(self) -> list[tuple[str, int, int]]:
        """(condition, accepted, rejected) per annotation, in creation order."""
        return [
            (a.condition.value, a.accepted_count(), a.rejected_count()) for a in self.annotations()
        ]

    def accepted_tag_labels(self) -> list[str]:
        """Accepted tag labels across annotations, in creation order."""
        labels = []
        for a in self.annotations():
            labels.extend(t.label for t in a.tags.values() if t.state is Polarity.ACCEPTED)
        return labels

    def evolution_records(self) -> list[tuple[str, int]]:
        """(condition, accepted-tag count) per annotation, in creation order."""
        return [(a.condition.value, a.accepted_count()) for a in self.annotations()]

    def tag_counts(self) -> dict[str, int]:
        counts = {p.value: 0 for p in Polarity}
        for a in self._annotations.values():
            for t in a.tags.values():
                counts[t.state.value] += 1
        return counts

    # -- persistence ----------------------------------------------------------------

    def _persist_map(self, record: MapRecord) -> None:
        if self._dir is None:
            return
        doc = {
            "id": record.id,
            "title": record.title,
            "image_uri": record.image_uri,
            "width": record.width,
            "height": record.height,
            "metadata": record.metadata,
            "control_points": [
                {
                    "px": cp.pixel.x,
                    "py": cp.pixel.y,
                    "lon": cp.geo.lon,
                    "lat": cp.geo.lat,
                    "label": cp.label,
                }
                for cp in record.control_points
            ],
        }
        self._write_doc(self._dir / "maps" / f"{record.id}.json", doc)

    def _persist_annotation(self, annotation: Annotation) -> None:
        if self._dir is None:
            return
        doc = {
            "id": annotation.id,
            "uri": annotation.uri,
            "map_id": annotation.map_id,
            "shape": [[p.x, p.y] for p in annotation.shape],
            "body_text": annotation.body_text,
            "creator": {"id": annotation.creator.id, "display_name": annotation.creator.display_name},
            "condition": annotation.condition.value,
            "created_at": annotation.created_at,
            "seq": annotation.seq,
            "tags": [
                {
                    "key": t.key,
                    "label": t.label,
                    "state": t.state.value,
                    "origin": t.origin.value,
                    "created_at": t.created_at,
                    "uri": t.uri,
                    "abstract": t.abstract,
                }
                for t in annotation.tags.values()
            ],
        }
        self._write_doc(self._dir / "annotations" / f"{annotation.id}.json", doc)

    @staticmethod
    def _write_doc(path: Path, doc: dict) -> None:
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_text(json.dumps(doc, sort_keys=True, indent=1), encoding="utf-8")
        os.replace(tmp, path)

    def _load(self) -> None:
        for path in sorted((self._dir / "maps").glob("*.json")):
            doc = json.loads(path.read_text(encoding="utf-8"))
            record = MapRecord(
                id=doc["id"],
                title=doc["title"],
                image_uri=doc["image_uri"],
                width=doc["width"],
                height=doc["height"],
                metadata=doc["metadata"],
                control_points=[
                    ControlPoint(
                        pixel=PixelPoint(cp["px"], cp["py"]),
                        geo=GeoPoint(lon=cp["lon"], lat=cp["lat"]),
                        label=cp.get("label"),
                    )
                    for cp in doc["control_points"]
                ],
            )
            self._maps[record.id] = record
            self.graph.add_resource(ResourceRef(uri=self.map_uri(record.id), kind="map"))
        for path in sorted((self._dir / "annotations").glob("*.json")):
            doc = json.loads(path.read_text(encoding="utf-8"))
            annotation = Annotation(
                id=doc["id"],
                uri=doc["uri"],
                map_id=doc["map_id"],
                shape=[PixelPoint(x, y) for x, y in doc["shape"]],
                body_text=doc["body_text"],
                creator=UserRef(id=doc["creator"]["id"], display_name=doc["creator"]["display_name"]),
                condition=Condition(doc["condition"]),
                created_at=doc["created_at"],
                seq=doc["seq"],
            )
            self._next_seq = max(self._next_seq, annotation.seq + 1)
            for t in doc["tags"]:
                annotation.tags[t["key"]] = TagState(
                    key=t["key"],
                    label=t["label"],
                    state=Polarity(t["state"]),
                    origin=Origin(t["origin"]),
                    created_at=t["created_at"],
                    uri=t.get("uri"),
                    abstract=t.get("abstract"),
                )
            self._annotations[annotation.id] = annotation
            self.graph.add_user(annotation.creator)
            self.graph.add_resource(ResourceRef(uri=annotation.uri, kind="annotation"))
