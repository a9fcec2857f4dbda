"""Collaborative map annotation with concept-based tagging.

The package splits into focused modules:

    geo        control-point georeferencing and Spherical Mercator math
    graph      qualified accept/reject/neutral tagging relationships
    suggest    provider-backed tag suggestion pipelines
    providers  bundled offline knowledge-context fixtures
    live       opt-in HTTP provider adapters
    store      maps, annotations, tri-state tags, persistence, search
    stats      the experiment statistics toolkit
    service    HTTP facade (FastAPI application factory)
    cli        command-line entry points
    sampledata deterministic synthetic experiment dataset
"""

from .config import ServiceConfig, load_config
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
from .geo import (
    ControlPoint,
    GeoBBox,
    GeoPoint,
    GeoTransform,
    PixelPoint,
    fit_transform,
    lonlat_to_mercator,
    mercator_to_lonlat,
    pixel_to_geo,
    shape_geo_bbox,
)
from .graph import KnowledgeResource, Origin, Polarity, ResourceRef, TagGraph, TagRelationship, UserRef
from .providers import FixtureKnowledgeContext, load_knowledge_context
from .service import create_app
from .stats import (
    ContingencyTable,
    RankCountMatrix,
    StatResult,
    balanced_latin_square,
    chi2_sf,
    chi_square,
    cohens_kappa,
    cumulative_evolution,
    friedman_from_rank_counts,
    mean_tags_per_condition,
    tag_frequency,
)
from .store import Annotation, AnnotationStore, Condition, MapRecord, TagState, parse_open_annotation
from .suggest import (
    Suggestion,
    expand_related,
    merge_suggestions,
    suggest_from_history,
    suggest_from_region,
    suggest_from_text,
)

__version__ = "0.1.0"
