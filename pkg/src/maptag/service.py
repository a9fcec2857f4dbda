"""HTTP facade over the store, graph, suggestion, geo, and stats modules.

Annotations are dereferenceable: GET /annotations/{id} serves exactly the
canonical export bytes produced at creation time, so create-then-fetch is
byte-identical and any web client can follow an annotation URI.

Suggestion endpoints are annotation-scoped: the computed suggestions are
attached to the annotation as neutral chips before the response returns,
so a subsequent cycle call on any returned key is valid. Keys the user has
already judged are excluded from new proposals. In live provider mode a
provider outage degrades the endpoint to an empty suggestion list (502
with "degraded": true) without touching any state.

Request and response bodies are documented with examples in docs/api.md.
"""

from __future__ import annotations

from typing import Literal

from fastapi import FastAPI, HTTPException, Query, Request, Response
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import stats as statsmod
from .config import ServiceConfig
from .errors import (
    DegenerateGeometryError,
    DegenerateTableError,
    InsufficientDataError,
    InvalidMatrixError,
    MaptagError,
    NotFoundError,
    OutOfRangeError,
    ProviderUnavailableError,
    ValidationError,
)
from .geo import ControlPoint, GeoPoint, PixelPoint, shape_geo_bbox
from .graph import Polarity, UserRef
from .live import CachedFetcher, HttpEntityProvider, HttpGazetteerProvider
from .providers import load_knowledge_context
from .store import Annotation, AnnotationStore, Condition, MapRecord, TagState
from .suggest import (
    Suggestion,
    expand_related,
    merge_suggestions,
    suggest_from_history,
    suggest_from_region,
    suggest_from_text,
)

STATS_REPORTS = ("frequencies", "means", "chi-square", "friedman", "evolution")


class CreatorIn(BaseModel):
    id: str
    display_name: str = ""


class AnnotationIn(BaseModel):
    shape: list[tuple[float, float]] = Field(min_length=1)
    body_text: str = ""
    creator: CreatorIn
    condition: Literal["LT", "ST", "SMT", "SMT_CTX"]


class ControlPointIn(BaseModel):
    px: float
    py: float
    lon: float
    lat: float
    label: str | None = None


class BodyIn(BaseModel):
    text: str


class LabelsIn(BaseModel):
    raw: str


class MapIn(BaseModel):
    id: str
    title: str = ""
    image_uri: str = ""
    width: int
    height: int
    metadata: dict[str, str] = Field(default_factory=dict)
    control_points: list[ControlPointIn] = Field(default_factory=list)


def _map_view(store: AnnotationStore, record: MapRecord) -> dict:
    return {
        "id": record.id,
        "uri": store.map_uri(record.id),
        "title": record.title,
        "image_uri": record.image_uri,
        "width": record.width,
        "height": record.height,
        "metadata": dict(sorted(record.metadata.items())),
        "control_points": [
            {"px": cp.pixel.x, "py": cp.pixel.y, "lon": cp.geo.lon, "lat": cp.geo.lat, "label": cp.label}
            for cp in record.control_points
        ],
    }


def _annotation_summary(annotation: Annotation) -> dict:
    return {
        "id": annotation.id,
        "uri": annotation.uri,
        "map_id": annotation.map_id,
        "condition": annotation.condition.value,
        "created_at": annotation.created_at,
        "body_text": annotation.body_text,
        "tag_count": len(annotation.tags),
    }


def _tag_view(tag: TagState) -> dict:
    return {
        "key": tag.key,
        "label": tag.label,
        "uri": tag.uri,
        "abstract": tag.abstract,
        "origin": tag.origin.value,
        "state": tag.state.value,
    }


def _suggestion_view(s: Suggestion, state: str) -> dict:
    return {
        "key": s.key,
        "label": s.label,
        "uri": s.uri,
        "score": s.score,
        "origin": s.origin,
        "abstract": s.abstract,
        "state": state,
    }


_CONDITION_SOURCES = {
    Condition.LT: frozenset(),
    Condition.ST: frozenset({"history"}),
    Condition.SMT: frozenset({"text", "region"}),
    Condition.SMT_CTX: frozenset({"text", "region"}),
}


def create_app(
    config: ServiceConfig | None = None,
    store: AnnotationStore | None = None,
    knowledge=None,
) -> FastAPI:
    """Build the service; `store` and `knowledge` override config wiring for tests."""
    config = config or ServiceConfig()
    fixture_context = knowledge if knowledge is not None else load_knowledge_context()
    if config.provider_mode == "live":
        fetcher = CachedFetcher(timeout_s=config.timeout_s)
        entity_provider = HttpEntityProvider(config.entity_endpoint, fetcher)
        gazetteer_provider = HttpGazetteerProvider(config.gazetteer_endpoint, fetcher)
    else:
        entity_provider = fixture_context
        gazetteer_provider = fixture_context
    related_provider = fixture_context

    if store is None:
        store = AnnotationStore(
            data_dir=config.data_dir,
            base_uri=config.resolved_base_uri,
            suggestion_cap=config.suggestion_cap,
        )

    app = FastAPI(title="maptag", docs_url=None, redoc_url=None)
    app.state.store = store
    app.state.config = config

    @app.exception_handler(MaptagError)
    def _maptag_error(request: Request, exc: MaptagError):
        if isinstance(exc, NotFoundError):
            status = 404
        elif isinstance(exc, (InsufficientDataError, DegenerateGeometryError, DegenerateTableError)):
            status = 409
        elif isinstance(exc, ProviderUnavailableError):
            status = 502
        elif isinstance(exc, (ValidationError, InvalidMatrixError, OutOfRangeError)):
            status = 400
        else:
            status = 500
        return JSONResponse(status_code=status, content={"detail": str(exc)})

    # -- maps ---------------------------------------------------------------

    @app.get("/")
    def service_info():
        return {
            "service": "maptag",
            "maps": len(store.maps()),
            "annotations": store.annotation_count(),
            "provider_mode": config.provider_mode,
            "suggestion_cap": config.suggestion_cap,
        }

    @app.get("/maps")
    def list_maps():
        return {"maps": [_map_view(store, m) for m in store.maps()]}

    @app.post("/maps", status_code=201)
    def ingest_maps(payload: MapIn | list[MapIn]):
        records = payload if isinstance(payload, list) else [payload]
        ingested = []
        for rec in records:
            store.add_map(
                MapRecord(
                    id=rec.id,
                    title=rec.title,
                    image_uri=rec.image_uri,
                    width=rec.width,
                    height=rec.height,
                    metadata=dict(rec.metadata),
                    control_points=[
                        ControlPoint(PixelPoint(cp.px, cp.py), GeoPoint(lon=cp.lon, lat=cp.lat), label=cp.label)
                        for cp in rec.control_points
                    ],
                )
            )
            ingested.append(rec.id)
        return {"ingested": ingested}

    @app.get("/maps/{map_id}")
    def get_map(map_id: str):
        return _map_view(store, store.get_map(map_id))

    @app.post("/maps/{map_id}/control_points")
    def add_control_points(map_id: str, points: list[ControlPointIn]):
        record = store.add_control_points(
            map_id,
            [ControlPoint(PixelPoint(p.px, p.py), GeoPoint(lon=p.lon, lat=p.lat), label=p.label) for p in points],
        )
        return {"map_id": map_id, "control_points": len(record.control_points)}

    @app.get("/maps/{map_id}/transform")
    def get_transform(map_id: str):
        t = store.transform_for(map_id)
        return {
            "a": t.a, "b": t.b, "c": t.c, "d": t.d, "e": t.e, "f": t.f,
            "rms_residual": t.rms_residual,
        }

    # -- annotations -----------------------------------------------------------

    @app.post("/maps/{map_id}/annotations")
    def create_annotation(map_id: str, payload: AnnotationIn):
        annotation = store.create_annotation(
            map_id=map_id,
            shape=payload.shape,
            body_text=payload.body_text,
            creator=UserRef(id=payload.creator.id, display_name=payload.creator.display_name),
            condition=payload.condition,
        )
        body = store.serialize_open_annotation(annotation.id)
        return Response(
            content=body,
            status_code=201,
            media_type="application/json",
            headers={"Location": annotation.uri},
        )

    @app.get("/annotations")
    def list_annotations():
        return {"annotations": [_annotation_summary(a) for a in store.annotations()]}

    @app.get("/annotations/{annotation_id}")
    def get_annotation(annotation_id: str):
        return Response(content=store.serialize_open_annotation(annotation_id), media_type="application/json")

    @app.get("/annotations/{annotation_id}/tags")
    def list_tags(annotation_id: str):
        annotation = store.get_annotation(annotation_id)
        return {"tags": [_tag_view(t) for t in annotation.tags.values()]}

    @app.post("/annotations/{annotation_id}/body")
    def set_body(annotation_id: str, payload: BodyIn):
        store.set_body_text(annotation_id, payload.text)
        return Response(content=store.serialize_open_annotation(annotation_id), media_type="application/json")

    @app.post("/annotations/{annotation_id}/labels")
    def add_labels(annotation_id: str, payload: LabelsIn):
        tags = store.add_label_tags(annotation_id, payload.raw)
        return {"tags": [_tag_view(t) for t in tags]}

    @app.post("/annotations/{annotation_id}/tags/{tag_key:path}/cycle")
    def cycle_tag(annotation_id: str, tag_key: str):
        tag = store.cycle_tag_state(annotation_id, tag_key)
        return {"key": tag.key, "label": tag.label, "state": tag.state.value}

    # -- suggestions -------------------------------------------------------------

    def _suggestion_response(annotation: Annotation, lists) -> dict:
        exclude = {t.key for t in annotation.tags.values() if t.state is not Polarity.NEUTRAL}
        merged = merge_suggestions(lists, cap=config.suggestion_cap, exclude=exclude)
        store.attach_suggestions(annotation.id, merged)
        current = store.get_annotation(annotation.id)
        views = []
        for s in merged:
            chip = current.tags.get(s.key)
            views.append(_suggestion_view(s, chip.state.value if chip else "neutral"))
        return {"suggestions": views, "degraded": False}

    def _require_source(annotation: Annotation, source: str) -> None:
        if source not in _CONDITION_SOURCES[annotation.condition]:
            raise HTTPException(
                status_code=409,
                detail=f"condition {annotation.condition.value} does not use {source} suggestions",
            )

    @app.get("/suggest/text")
    def suggest_text(
        annotation: str = Query(...),
        q: str = Query(...),
        limit: int = Query(default=None, ge=0),
        related: bool = Query(default=False),
    ):
        ann = store.get_annotation(annotation)
        _require_source(ann, "text")
        cap = config.suggestion_cap if limit is None else limit
        try:
            lists = [suggest_from_text(q, entity_provider, limit=cap)]
            if related:
                for s in list(lists[0]):
                    if s.uri:
                        lists.append(expand_related(s.uri, related_provider, limit=cap))
        except ProviderUnavailableError as exc:
            return JSONResponse(status_code=502, content={"suggestions": [], "degraded": True, "detail": str(exc)})
        return _suggestion_response(ann, lists)

    @app.get("/suggest/region")
    def suggest_region(
        annotation: str = Query(...),
        limit: int = Query(default=None, ge=0),
    ):
        ann = store.get_annotation(annotation)
        _require_source(ann, "region")
        transform = store.transform_for(ann.map_id)  # 409 without enough control points
        bbox = shape_geo_bbox(ann.shape, transform)
        cap = config.suggestion_cap if limit is None else limit
        try:
            lists = [suggest_from_region(bbox, gazetteer_provider, limit=cap)]
        except ProviderUnavailableError as exc:
            return JSONResponse(status_code=502, content={"suggestions": [], "degraded": True, "detail": str(exc)})
        return _suggestion_response(ann, lists)

    @app.get("/suggest/history")
    def suggest_history(
        annotation: str = Query(...),
        seed: int = Query(default=0),
        limit: int = Query(default=None, ge=0),
    ):
        ann = store.get_annotation(annotation)
        _require_source(ann, "history")
        cap = config.suggestion_cap if limit is None else limit
        lists = [suggest_from_history(store.graph, rng_seed=seed, limit=cap)]
        return _suggestion_response(ann, lists)

    # -- search ------------------------------------------------------------------

    @app.get("/search")
    def search(q: str = Query(default="")):
        hits = []
        for hit in store.search(q):
            uri = store.map_uri(hit.id) if hit.kind == "map" else store.annotation_uri(hit.id)
            hits.append({"kind": hit.kind, "id": hit.id, "uri": uri, "matched_in": hit.matched_in})
        return {"hits": hits}

    # -- stats -------------------------------------------------------------------

    def _coded_pairs(by: str) -> list[tuple[str, str]]:
        pairs = []
        for annotation in store.annotations():
            for edge in store.graph.edges_for_target(annotation.uri):
                if edge.coding:
                    pairs.append((annotation.condition.value, edge.coding[by]))
        return pairs

    @app.get("/stats/{report}")
    def stats_report(report: str, by: str = Query(default="type")):
        if report not in STATS_REPORTS:
            raise NotFoundError(f"unknown stats report: {report}")
        if report == "frequencies":
            return {"name": report, "frequencies": statsmod.tag_frequency(store.accepted_tag_labels())}
        if report == "means":
            means = statsmod.mean_tags_per_condition(store.annotation_tag_tallies())
            return {
                "name": report,
                "means": {c: {"accepted": a, "rejected": r} for c, (a, r) in sorted(means.items())},
            }
        if report == "evolution":
            return {"name": report, "series": statsmod.cumulative_evolution(store.evolution_records())}
        if report == "chi-square":
            if by not in ("type", "category"):
                raise ValidationError("by must be 'type' or 'category'")
            pairs = _coded_pairs(by)
            if not pairs:
                raise InsufficientDataError("no coded tags in the graph; POST a table instead")
            result = statsmod.chi_square_result(statsmod.crosstab(pairs), name=f"chi-square/{by}")
            return result.__dict__
        raise InsufficientDataError("friedman needs a rank-count table; POST one")

    @app.post("/stats/{report}")
    async def stats_from_table(report: str, request: Request):
        if report not in STATS_REPORTS:
            raise NotFoundError(f"unknown stats report: {report}")
        lines = (await request.body()).decode("utf-8").splitlines()
        if report == "chi-square":
            result = statsmod.chi_square_result(statsmod.load_contingency_table(lines))
            return result.__dict__
        if report == "friedman":
            result = statsmod.friedman_result(statsmod.load_rank_counts(lines))
            return result.__dict__
        raise ValidationError(f"report {report} does not accept uploaded tables")

    return app
