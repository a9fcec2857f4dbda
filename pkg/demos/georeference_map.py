"""Georeferencing a raster map from control points.

Walks the full pipeline: pin pixel locations to real-world coordinates,
fit the affine pixel->Mercator transform, convert arbitrary pixels, and
compute the geographic bounding box of a drawn shape.
"""

from maptag import (
    ControlPoint,
    GeoPoint,
    PixelPoint,
    fit_transform,
    lonlat_to_mercator,
    mercator_to_lonlat,
    pixel_to_geo,
    shape_geo_bbox,
)

# A scanned 4000x3000 map sheet covering the strait between Spain and
# Morocco. Three well-known locations pin it down.
control_points = [
    ControlPoint(PixelPoint(320, 410), GeoPoint(lon=-5.35, lat=36.14), label="Gibraltar"),
    ControlPoint(PixelPoint(2950, 520), GeoPoint(lon=-5.31, lat=35.89), label="Ceuta"),
    ControlPoint(PixelPoint(1480, 2550), GeoPoint(lon=-5.80, lat=35.78), label="Tangier"),
]

transform = fit_transform(control_points)
print("fitted affine coefficients:")
print(f"  X = {transform.a:+.3f}*x {transform.b:+.3f}*y {transform.c:+.1f}")
print(f"  Y = {transform.d:+.3f}*x {transform.e:+.3f}*y {transform.f:+.1f}")
print(f"  rms residual: {transform.rms_residual:.2e} m  (3 points -> exact interpolation)")

# Any pixel now has a geographic interpretation.
center = pixel_to_geo(transform, PixelPoint(2000, 1500))
print(f"\nmap center pixel (2000, 1500) -> lon {center.lon:.4f}, lat {center.lat:.4f}")

# The projection math is exactly invertible inside its validity band.
x, y = lonlat_to_mercator(center)
back = mercator_to_lonlat(x, y)
print(f"projection roundtrip error: {abs(back.lon - center.lon):.2e} deg lon")

# A user draws a region; its bounding box drives gazetteer lookups.
shape = [PixelPoint(900, 700), PixelPoint(2400, 750), PixelPoint(2300, 1900), PixelPoint(800, 1800)]
bbox = shape_geo_bbox(shape, transform)
print(
    f"\nannotation shape bounding box: lon [{bbox.min_lon:.4f}, {bbox.max_lon:.4f}],"
    f" lat [{bbox.min_lat:.4f}, {bbox.max_lat:.4f}]"
)
