"""Control-point georeferencing for raster maps.

Pixel coordinates follow the image convention: x grows rightward (column),
y grows downward (row). Real-world coordinates are handled in Spherical
Mercator meters on a sphere of radius 6378137 m; latitudes are only valid
strictly below |85.06| degrees.

An affine six-coefficient model maps pixels to Mercator meters:

    X = a*x + b*y + c
    Y = d*x + e*y + f

The model is fit by least squares over three or more control points. All
types here are immutable values and every function is pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DegenerateGeometryError,
    InsufficientDataError,
    OutOfRangeError,
    ValidationError,
)

EARTH_RADIUS_M = 6378137.0

# Latitude bound for Web-Mercator validity.
MAX_MERCATOR_LAT = 85.06

# Minimum triangle area (px^2) below which control points count as collinear.
MIN_TRIANGLE_AREA = 1e-6

# Minimum |det| of the linear part of a usable affine transform.
MIN_DETERMINANT = 1e-12


@dataclass(frozen=True)
class PixelPoint:
    """A point on the raster image, in pixels."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValidationError(f"pixel coordinates must be finite, got ({self.x}, {self.y})")


@dataclass(frozen=True)
class GeoPoint:
    """A point on the globe, in degrees."""

    lon: float
    lat: float

    def __post_init__(self):
        if not -180.0 <= self.lon <= 180.0:
            raise ValidationError(f"longitude {self.lon} outside [-180, 180]")
        if not -90.0 < self.lat < 90.0:
            raise ValidationError(f"latitude {self.lat} outside (-90, 90)")


@dataclass(frozen=True)
class ControlPoint:
    """A pixel location paired with the real-world location it depicts."""

    pixel: PixelPoint
    geo: GeoPoint
    label: str | None = None


@dataclass(frozen=True)
class GeoTransform:
    """Affine pixel -> Mercator-meters mapping plus its fit quality."""

    a: float
    b: float
    c: float
    d: float
    e: float
    f: float
    rms_residual: float = 0.0

    def __post_init__(self):
        det = self.a * self.e - self.b * self.d
        if abs(det) <= MIN_DETERMINANT:
            raise DegenerateGeometryError(f"affine transform is singular (det={det:.3e})")

    def apply(self, p: PixelPoint) -> tuple[float, float]:
        """Map a pixel point to Mercator meters."""
        return (
            self.a * p.x + self.b * p.y + self.c,
            self.d * p.x + self.e * p.y + self.f,
        )

    def coefficients(self) -> tuple[float, float, float, float, float, float]:
        return (self.a, self.b, self.c, self.d, self.e, self.f)


@dataclass(frozen=True)
class GeoBBox:
    """Axis-aligned geographic bounding box in degrees."""

    min_lon: float
    min_lat: float
    max_lon: float
    max_lat: float

    def __post_init__(self):
        if self.min_lon > self.max_lon or self.min_lat > self.max_lat:
            raise ValidationError("bounding box min exceeds max")

    def contains(self, lon: float, lat: float) -> bool:
        return self.min_lon <= lon <= self.max_lon and self.min_lat <= lat <= self.max_lat


def lonlat_to_mercator(p: GeoPoint) -> tuple[float, float]:
    """Project lon/lat degrees to Spherical Mercator meters.

    Raises OutOfRangeError for |lat| >= 85.06 where the projection blows up.
    """
    if abs(p.lat) >= MAX_MERCATOR_LAT:
        raise OutOfRangeError(f"latitude {p.lat} outside Mercator validity (|lat| < {MAX_MERCATOR_LAT})")
    x = EARTH_RADIUS_M * math.radians(p.lon)
    # atanh(sin(phi)) == ln(tan(pi/4 + phi/2)) but is exact at the equator.
    y = EARTH_RADIUS_M * math.atanh(math.sin(math.radians(p.lat)))
    return x, y


def mercator_to_lonlat(x: float, y: float) -> GeoPoint:
    """Exact analytic inverse of lonlat_to_mercator.

    Longitude is clamped to [-180, 180]; inputs a rounding error past the
    world edge would otherwise fall outside the valid GeoPoint range.
    """
    lon = max(-180.0, min(180.0, math.degrees(x / EARTH_RADIUS_M)))
    lat = math.degrees(2.0 * math.atan(math.exp(y / EARTH_RADIUS_M)) - math.pi / 2.0)
    return GeoPoint(lon=lon, lat=lat)


def _max_triangle_area(pixels: Sequence[PixelPoint]) -> float:
    """Largest triangle area spanned by any point triple.

    Uses the widest point pair as the base, so it stays O(n^2) while still
    being zero exactly when all points are collinear.
    """
    pts = [(p.x, p.y) for p in pixels]
    base = (0, 1)
    best = -1.0
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            d2 = (pts[i][0] - pts[j][0]) ** 2 + (pts[i][1] - pts[j][1]) ** 2
            if d2 > best:
                best = d2
                base = (i, j)
    (x1, y1), (x2, y2) = pts[base[0]], pts[base[1]]
    area = 0.0
    for x, y in pts:
        cross = (x2 - x1) * (y - y1) - (y2 - y1) * (x - x1)
        area = max(area, abs(cross) / 2.0)
    return area


def fit_transform(points: Sequence[ControlPoint]) -> GeoTransform:
    """Least-squares affine fit from control points.

    Minimizes the squared Mercator-meter error over all points; with exactly
    three non-collinear points the fit interpolates them exactly.

    The solve centers both coordinate sets and runs the normal equations in
    extended precision: Mercator targets sit at 1e6..2e7 m where a plain
    float64 least-squares solve leaves interpolation residuals well above
    the promised 1e-9 m.
    """
    if len(points) < 3:
        raise InsufficientDataError(f"need at least 3 control points, got {len(points)}")
    if _max_triangle_area([cp.pixel for cp in points]) <= MIN_TRIANGLE_AREA:
        raise DegenerateGeometryError("control-point pixels are collinear")

    pixels = np.array([[cp.pixel.x, cp.pixel.y] for cp in points], dtype=np.longdouble)
    targets = np.array([lonlat_to_mercator(cp.geo) for cp in points], dtype=np.longdouble)

    pixel_center = pixels.mean(axis=0)
    target_center = targets.mean(axis=0)
    p = pixels - pixel_center
    t = targets - target_center

    # Normal equations of the centered two-column system, solved by the
    # explicit 2x2 inverse (LAPACK has no extended-precision path).
    ata = p.T @ p
    atb = p.T @ t
    det = ata[0, 0] * ata[1, 1] - ata[0, 1] * ata[1, 0]
    if abs(float(det)) <= MIN_TRIANGLE_AREA:
        raise DegenerateGeometryError("control-point pixels are collinear")
    inv = np.array([[ata[1, 1], -ata[0, 1]], [-ata[1, 0], ata[0, 0]]], dtype=np.longdouble) / det
    linear = (inv @ atb).T  # rows (a, b) and (d, e)
    offset = target_center - linear @ pixel_center

    a, b = float(linear[0, 0]), float(linear[0, 1])
    d, e = float(linear[1, 0]), float(linear[1, 1])
    c, f = float(offset[0]), float(offset[1])

    pix64 = np.asarray(pixels, dtype=float)
    tgt64 = np.asarray(targets, dtype=float)
    predicted = np.stack(
        [a * pix64[:, 0] + b * pix64[:, 1] + c, d * pix64[:, 0] + e * pix64[:, 1] + f], axis=1
    )
    rms = float(np.sqrt(np.mean(np.sum((predicted - tgt64) ** 2, axis=1))))
    return GeoTransform(a=a, b=b, c=c, d=d, e=e, f=f, rms_residual=rms)


def pixel_to_geo(transform: GeoTransform, p: PixelPoint) -> GeoPoint:
    """Map a pixel through the affine transform and back to lon/lat degrees."""
    x, y = transform.apply(p)
    limit = EARTH_RADIUS_M * math.pi + 1e-6
    y_limit = EARTH_RADIUS_M * math.atanh(math.sin(math.radians(MAX_MERCATOR_LAT)))
    if abs(x) > limit or abs(y) >= y_limit:
        raise OutOfRangeError(f"pixel ({p.x}, {p.y}) maps to ({x:.3f}, {y:.3f}) m, outside Mercator validity")
    return mercator_to_lonlat(x, y)


def shape_geo_bbox(shape: Sequence[PixelPoint], transform: GeoTransform) -> GeoBBox:
    """Geographic bounding box of a pixel polygon under a transform.

    The box is the min/max over per-vertex images; affine maps keep edges
    straight and the final lon/lat conversion is monotone per axis, so the
    vertex box bounds the whole transformed polygon.
    """
    distinct = {(p.x, p.y) for p in shape}
    if len(shape) < 3 or len(distinct) < 3:
        raise ValidationError("shape needs at least 3 distinct vertices")
    geos = [pixel_to_geo(transform, p) for p in shape]
    lons = [g.lon for g in geos]
    lats = [g.lat for g in geos]
    return GeoBBox(min_lon=min(lons), min_lat=min(lats), max_lon=max(lons), max_lat=max(lats))


def parse_control_point_line(line: str) -> tuple[str, ControlPoint]:
    """Parse one control-point record: map_id,px,py,lon,lat[,label]."""
    parts = [p.strip() for p in line.split(",")]
    if len(parts) not in (5, 6):
        raise ValidationError(f"control-point record needs 5 or 6 fields: {line!r}")
    map_id, px, py, lon, lat = parts[:5]
    label = parts[5] if len(parts) == 6 and parts[5] else None
    try:
        cp = ControlPoint(
            pixel=PixelPoint(float(px), float(py)),
            geo=GeoPoint(lon=float(lon), lat=float(lat)),
            label=label,
        )
    except ValueError as exc:
        raise ValidationError(f"bad control-point record {line!r}: {exc}") from exc
    return map_id, cp


def parse_control_point_file(lines: Iterable[str]) -> list[tuple[str, ControlPoint]]:
    """Parse a control-point file; blank lines and '#' comments are skipped."""
    records = []
    for raw in lines:
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        records.append(parse_control_point_line(line))
    return records


def format_control_point_line(map_id: str, cp: ControlPoint) -> str:
    fields = [map_id, repr(cp.pixel.x), repr(cp.pixel.y), repr(cp.geo.lon), repr(cp.geo.lat)]
    if cp.label:
        fields.append(cp.label)
    return ",".join(fields)
