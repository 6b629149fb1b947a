"""Gnomonic (central) projection and tangent-plane sampling grids.

Coordinate conventions:

  - Spherical coordinates are (lat, lon) in radians, lat in [-pi/2, pi/2],
    lon normalized into [-pi, pi). The unit-vector mapping is
    x = cos(lat)cos(lon), y = cos(lat)sin(lon), z = sin(lat), so the +z axis
    is the north pole, matching the icosphere orientation.
  - Plane coordinates are dimensionless tangent units (tan of angle). The
    projection center maps to (0, 0); +y is the local increasing-latitude
    direction ("north-up"), +x is local east.
  - Pixel grids are row-major with row 0 at the top (+y, higher latitude)
    and column 0 at -x; pixel centers are uniformly spaced on the plane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, OutOfHemisphereError
from .icosphere import Icosphere, vertex_resolution_at

#: cos(c) at or below this value counts as out of the projection hemisphere.
_HEMISPHERE_EPS = 1e-12


def wrap_longitude(lon):
    """Normalize longitudes into [-pi, pi)."""
    return (np.asarray(lon) + np.pi) % (2.0 * np.pi) - np.pi


@dataclass(frozen=True)
class SphericalCoord:
    """A point on the sphere; longitude is wrapped on construction."""

    lat: float
    lon: float

    def __post_init__(self):
        if not math.isfinite(self.lat) or not math.isfinite(self.lon):
            raise InvalidArgumentError("spherical coordinates must be finite")
        if abs(self.lat) > math.pi / 2 + 1e-12:
            raise InvalidArgumentError(
                f"latitude {self.lat} outside [-pi/2, pi/2]")
        object.__setattr__(self, "lat", float(np.clip(self.lat, -math.pi / 2, math.pi / 2)))
        object.__setattr__(self, "lon", float(wrap_longitude(self.lon)))

    def to_unit_vector(self) -> np.ndarray:
        cl = math.cos(self.lat)
        return np.array([cl * math.cos(self.lon),
                         cl * math.sin(self.lon),
                         math.sin(self.lat)])


def unit_vectors(lat, lon) -> np.ndarray:
    """Stack (lat, lon) arrays into (..., 3) unit vectors."""
    lat = np.asarray(lat, dtype=np.float64)
    lon = np.asarray(lon, dtype=np.float64)
    cl = np.cos(lat)
    return np.stack([cl * np.cos(lon), cl * np.sin(lon), np.sin(lat)], axis=-1)


def to_spherical(vectors: np.ndarray):
    """Inverse of unit_vectors: (..., 3) -> (lat, lon) arrays."""
    v = np.asarray(vectors, dtype=np.float64)
    lat = np.arcsin(np.clip(v[..., 2], -1.0, 1.0))
    lon = np.arctan2(v[..., 1], v[..., 0])
    return lat, wrap_longitude(lon)


@dataclass(frozen=True)
class TangentPlaneSpec:
    """Geometry of one tangent image: where it sits and how it is sampled.

    half_extent is the plane-unit offset of the outermost pixel centers from
    the center, (d-1)/(2d) times the vertex resolution one level below the
    base; pixel centers span [-half_extent, +half_extent] per axis.
    """

    face_index: int
    center: SphericalCoord
    dim: int
    half_extent: float
    base_level: int
    source_level: int

    def __post_init__(self):
        if self.source_level < self.base_level:
            raise InvalidArgumentError("source_level must be >= base_level")
        if self.dim != 2 ** (self.source_level - self.base_level):
            raise InvalidArgumentError(
                f"dim {self.dim} != 2**(s-b) for s={self.source_level}, b={self.base_level}")
        # half_extent is 0 exactly in the degenerate single-pixel case.
        if self.dim == 1:
            if self.half_extent != 0.0:
                raise InvalidArgumentError("half_extent must be 0 when dim == 1")
        elif not (0.0 < self.half_extent < math.pi / 2):
            raise InvalidArgumentError(
                f"half_extent {self.half_extent} outside (0, pi/2)")

    @property
    def pixel_pitch(self) -> float:
        """Plane-unit spacing between adjacent pixel centers. Equals the
        level-(b-1) vertex resolution divided by dim, also for dim == 1."""
        if self.dim == 1:
            return vertex_resolution_at(self.base_level - 1)
        return 2.0 * self.half_extent / (self.dim - 1)

    def axis_fov(self) -> float:
        """Field of view along one axis in radians, measured over the full
        pixel footprint (half a pixel beyond the outermost centers)."""
        return 2.0 * math.atan(self.half_extent + 0.5 * self.pixel_pitch)


def tangent_dim(source_level: int, base_level: int) -> int:
    """Pixels per side of a tangent image: 2**(source_level - base_level)."""
    for name, val in (("source_level", source_level), ("base_level", base_level)):
        if not isinstance(val, (int, np.integer)) or isinstance(val, bool):
            raise InvalidArgumentError(f"{name} must be an integer, got {val!r}")
    if base_level < 0:
        raise InvalidArgumentError(f"base_level must be >= 0, got {base_level}")
    if source_level < base_level:
        raise InvalidArgumentError(
            f"source_level {source_level} < base_level {base_level}: "
            "tangent images cannot have fractional pixels")
    return 2 ** (int(source_level) - int(base_level))


def make_plane_specs(sphere_base: Icosphere, source_level: int) -> list:
    """One TangentPlaneSpec per face of the base sphere, centered on the
    face barycenters, with extents set so the grids cover their faces."""
    b = sphere_base.level
    d = tangent_dim(source_level, b)
    r = vertex_resolution_at(b - 1)
    half = (d - 1) / (2.0 * d) * r
    lat, lon = to_spherical(sphere_base.face_barycenters())
    return [
        TangentPlaneSpec(
            face_index=k,
            center=SphericalCoord(float(lat[k]), float(lon[k])),
            dim=d,
            half_extent=half,
            base_level=b,
            source_level=int(source_level),
        )
        for k in range(sphere_base.num_faces)
    ]


def gnomonic_forward(center: SphericalCoord, lat, lon):
    """Project spherical points onto the plane tangent at center.

    Accepts scalars or arrays for lat/lon; returns (x, y) of the same shape.
    Raises OutOfHemisphereError if any point is 90 degrees or more away
    from the center.
    """
    lat = np.asarray(lat, dtype=np.float64)
    lon = np.asarray(lon, dtype=np.float64)
    sin_c0, cos_c0 = math.sin(center.lat), math.cos(center.lat)
    dlon = lon - center.lon
    cos_dlon = np.cos(dlon)
    cos_lat = np.cos(lat)
    sin_lat = np.sin(lat)
    cos_c = sin_c0 * sin_lat + cos_c0 * cos_lat * cos_dlon
    if np.any(cos_c <= _HEMISPHERE_EPS):
        raise OutOfHemisphereError(
            "point at or beyond 90 degrees from the projection center")
    x = cos_lat * np.sin(dlon) / cos_c
    y = (cos_c0 * sin_lat - sin_c0 * cos_lat * cos_dlon) / cos_c
    if x.ndim == 0:
        return float(x), float(y)
    return x, y


def gnomonic_inverse(center: SphericalCoord, x, y):
    """Map plane coordinates back to the sphere. Total on finite input;
    (0, 0) returns the center exactly."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise InvalidArgumentError("plane coordinates must be finite")
    sin_c0, cos_c0 = math.sin(center.lat), math.cos(center.lat)
    # With cos(c) = 1/sqrt(1+rho^2) the textbook inverse reduces to a
    # singularity-free closed form.
    denom = np.sqrt(1.0 + x * x + y * y)
    lat = np.arcsin(np.clip((sin_c0 + y * cos_c0) / denom, -1.0, 1.0))
    lon = wrap_longitude(center.lon + np.arctan2(x, cos_c0 - y * sin_c0))
    # The plane origin is the center exactly, not merely to round-off.
    at_center = (x == 0.0) & (y == 0.0)
    if np.any(at_center):
        lat = np.where(at_center, center.lat, lat)
        lon = np.where(at_center, center.lon, lon)
    if lat.ndim == 0:
        return float(lat), float(lon)
    return lat, lon


def plane_axes(spec: TangentPlaneSpec):
    """Per-axis pixel-center coordinates: (xs ascending, ys descending)."""
    d, h = spec.dim, spec.half_extent
    if d == 1:
        return np.zeros(1), np.zeros(1)
    xs = np.linspace(-h, h, d)
    ys = np.linspace(h, -h, d)
    return xs, ys


def plane_pixel_grid(spec: TangentPlaneSpec) -> np.ndarray:
    """(d, d, 2) array of pixel-center spherical coordinates, [..., 0] = lat,
    [..., 1] = lon. Row 0 is the top of the image (highest latitude through
    the center column)."""
    xs, ys = plane_axes(spec)
    X, Y = np.meshgrid(xs, ys)
    lat, lon = gnomonic_inverse(spec.center, X, Y)
    return np.stack([lat, lon], axis=-1)


def plane_to_pixel(spec: TangentPlaneSpec, x, y):
    """Plane coordinates -> fractional (col, row) pixel indices of the grid."""
    if spec.dim == 1:
        x = np.asarray(x, dtype=np.float64)
        return np.zeros_like(x), np.zeros_like(x)
    pitch = spec.pixel_pitch
    col = (np.asarray(x, dtype=np.float64) + spec.half_extent) / pitch
    row = (spec.half_extent - np.asarray(y, dtype=np.float64)) / pitch
    return col, row


def pixel_to_plane(spec: TangentPlaneSpec, col, row):
    """Fractional (col, row) pixel indices -> plane coordinates."""
    if spec.dim == 1:
        col = np.asarray(col, dtype=np.float64)
        return np.zeros_like(col), np.zeros_like(col)
    pitch = spec.pixel_pitch
    x = np.asarray(col, dtype=np.float64) * pitch - spec.half_extent
    y = spec.half_extent - np.asarray(row, dtype=np.float64) * pitch
    return x, y
