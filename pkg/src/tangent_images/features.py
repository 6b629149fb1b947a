"""Sparse-keypoint support: reprojecting detections from tangent grids to the
sphere, field-of-view overlap between posed panoramas, and the aggregate
matching metrics (putative matching ratio, matching score, precision).

Detection, description, and matching themselves are out of scope; this
module consumes keypoints and per-pair match counts produced elsewhere.
"""

from __future__ import annotations

import base64
import json
import math
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import (
    InvalidArgumentError,
    InvalidEntryError,
    UndefinedOverlapError,
)
from .gnomonic import gnomonic_inverse, pixel_to_plane, unit_vectors
from .icosphere import build_icosphere, owning_faces
from .images import EquirectImage, latlon_to_pixel, pixel_to_latlon

#: Depth agreement tolerance for the occlusion test: a reprojected point is
#: visible when the stored depth matches its distance within
#: max(OCCLUSION_REL * distance, OCCLUSION_ABS meters).
OCCLUSION_REL = 0.03
OCCLUSION_ABS = 0.05


@dataclass(frozen=True)
class Keypoint:
    """A detected keypoint; position can live on an equirect image or on one
    tangent grid. scale/orientation/descriptor ride along untouched."""

    source: str  # "equirect" | "tangent"
    u: float
    v: float
    scale: float
    orientation: float
    face_index: Optional[int] = None
    descriptor: Optional[np.ndarray] = None
    lat: Optional[float] = None
    lon: Optional[float] = None

    def __post_init__(self):
        if self.source not in ("equirect", "tangent"):
            raise InvalidArgumentError(f"unknown keypoint source {self.source!r}")
        if self.source == "tangent" and self.face_index is None:
            raise InvalidArgumentError("tangent keypoints need a face_index")


@dataclass
class PosedSphericalImage:
    """A panorama with per-pixel radial depth (meters, NaN = invalid) and a
    world-from-camera rigid pose."""

    depth: EquirectImage
    rotation: np.ndarray  # (3, 3), world <- camera
    translation: np.ndarray  # (3,), meters
    color: Optional[EquirectImage] = None

    def __post_init__(self):
        r = np.asarray(self.rotation, dtype=np.float64)
        t = np.asarray(self.translation, dtype=np.float64)
        if r.shape != (3, 3) or t.shape != (3,):
            raise InvalidArgumentError("pose must be a (3,3) rotation and (3,) translation")
        if np.abs(r @ r.T - np.eye(3)).max() > 1e-9:
            raise InvalidArgumentError("rotation is not orthonormal within 1e-9")
        if self.depth.channels != 1:
            raise InvalidArgumentError("depth must be single-channel")
        if self.color is not None and (
                self.color.height != self.depth.height
                or self.color.width != self.depth.width):
            raise InvalidArgumentError("color and depth dimensions differ")
        self.rotation = r
        self.translation = t


@dataclass(frozen=True)
class MatchStats:
    """Counts for one image pair: putative matches p, inliers f, and the
    covisible keypoint counts of the two images."""

    pair_id: str
    p: int
    f: int
    n_left: int
    n_right: int


def keypoints_to_sphere(kps: Sequence[Keypoint],
                        specs: Sequence) -> List[Keypoint]:
    """Reproject tangent-grid keypoints to spherical coordinates, keeping a
    keypoint only if its direction is owned by the face it was detected on.

    Overlapping tangent images see the same content; ownership makes exactly
    one copy of a repeated detection survive.
    """
    if not specs:
        raise InvalidArgumentError("no tangent plane specs given")
    sphere = build_icosphere(specs[0].base_level)
    nf = len(specs)
    out: List[Keypoint] = []
    for kp in kps:
        if kp.source != "tangent":
            raise InvalidArgumentError(
                "keypoints_to_sphere expects tangent-grid keypoints")
        if not 0 <= kp.face_index < nf:
            raise InvalidArgumentError(
                f"face index {kp.face_index} out of range [0, {nf})")
        spec = specs[kp.face_index]
        if not (-0.5 <= kp.u <= spec.dim - 0.5 and -0.5 <= kp.v <= spec.dim - 0.5):
            raise InvalidArgumentError(
                f"keypoint ({kp.u}, {kp.v}) outside its {spec.dim}x{spec.dim} grid")
        x, y = pixel_to_plane(spec, kp.u, kp.v)
        lat, lon = gnomonic_inverse(spec.center, float(x), float(y))
        direction = unit_vectors(lat, lon)
        owner = int(owning_faces(sphere, direction[None, :])[0])
        if owner != kp.face_index:
            continue
        out.append(replace(kp, lat=float(lat), lon=float(lon)))
    return out


def _camera_directions(depth: EquirectImage) -> np.ndarray:
    h, w = depth.height, depth.width
    ii, jj = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    lat, lon = pixel_to_latlon(ii.ravel(), jj.ravel(), h, w)
    return unit_vectors(lat, lon)


def visible_in_other(points_world: np.ndarray,
                     other: PosedSphericalImage) -> np.ndarray:
    """Occlusion-aware visibility of world points in another panorama.

    A point is visible when the other image's depth map holds a valid value
    in the point's direction and that value agrees with the point's distance
    within max(3% relative, 0.05 m).
    """
    local = (points_world - other.translation) @ other.rotation
    dist = np.linalg.norm(local, axis=1)
    ok = dist > 0
    safe = np.where(ok, dist, 1.0)
    lat = np.arcsin(np.clip(local[:, 2] / safe, -1.0, 1.0))
    lon = np.arctan2(local[:, 1], local[:, 0])
    h, w = other.depth.height, other.depth.width
    i, j = latlon_to_pixel(lat, lon, h, w)
    yi = np.clip(np.floor(i + 0.5).astype(np.int64), 0, h - 1)
    xi = np.mod(np.floor(j + 0.5).astype(np.int64), w)
    stored = other.depth.samples[yi, xi, 0]
    tol = np.maximum(OCCLUSION_REL * dist, OCCLUSION_ABS)
    return ok & np.isfinite(stored) & (np.abs(stored - dist) <= tol)


def _directional_fraction(src: PosedSphericalImage,
                          dst: PosedSphericalImage) -> float:
    depth = src.depth.samples[:, :, 0].ravel()
    valid = np.isfinite(depth) & (depth > 0)
    if not np.any(valid):
        raise UndefinedOverlapError("depth map has no valid samples")
    dirs = _camera_directions(src.depth)[valid]
    points = dirs * depth[valid, None] @ src.rotation.T + src.translation
    return float(np.mean(visible_in_other(points, dst)))


def fov_overlap(a: PosedSphericalImage, b: PosedSphericalImage) -> float:
    """Symmetric field-of-view overlap: the average of the fraction of a's
    depth-backed points visible in b and vice versa. Lies in [0, 1]."""
    return 0.5 * (_directional_fraction(a, b) + _directional_fraction(b, a))


def matching_metrics(stats: Sequence[MatchStats]) -> dict:
    """Aggregate PMR, MS, and precision over image pairs.

    PMR averages (p/n_left + p/n_right)/2, MS the same with inliers f, and
    precision averages f/p. Entries with a zero denominator are rejected.
    """
    if not stats:
        raise InvalidArgumentError("matching_metrics needs at least one pair")
    pmr_terms, ms_terms, p_terms = [], [], []
    for st in stats:
        if st.p <= 0 or st.n_left <= 0 or st.n_right <= 0:
            raise InvalidEntryError(
                f"pair {st.pair_id!r}: p, n_left, n_right must be positive "
                f"(got p={st.p}, n_left={st.n_left}, n_right={st.n_right})")
        if not 0 <= st.f <= st.p:
            raise InvalidEntryError(
                f"pair {st.pair_id!r}: need 0 <= f <= p (got f={st.f}, p={st.p})")
        pmr_terms.append(0.5 * (st.p / st.n_left + st.p / st.n_right))
        ms_terms.append(0.5 * (st.f / st.n_left + st.f / st.n_right))
        p_terms.append(st.f / st.p)
    n = len(stats)
    # fsum makes the result independent of pair order.
    return {"pmr": math.fsum(pmr_terms) / n,
            "ms": math.fsum(ms_terms) / n,
            "precision": math.fsum(p_terms) / n}


# ---------------------------------------------------------------------------
# File formats


def load_match_stats(path: str) -> List[MatchStats]:
    """JSON array of {pair_id, p, f, n_left, n_right}."""
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, list):
        raise InvalidArgumentError(f"{path}: expected a JSON array of pair stats")
    out = []
    for entry in data:
        try:
            out.append(MatchStats(
                pair_id=str(entry["pair_id"]),
                p=int(entry["p"]), f=int(entry["f"]),
                n_left=int(entry["n_left"]), n_right=int(entry["n_right"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidArgumentError(f"{path}: malformed entry {entry!r}") from exc
    return out


def _descriptor_to_b64(desc: Optional[np.ndarray]) -> Optional[str]:
    if desc is None:
        return None
    return base64.b64encode(np.asarray(desc, dtype=np.float32).tobytes()).decode()


def _descriptor_from_b64(text: Optional[str]) -> Optional[np.ndarray]:
    if text is None:
        return None
    return np.frombuffer(base64.b64decode(text), dtype=np.float32).copy()


def load_keypoints(path: str) -> List[Keypoint]:
    """JSON-lines keypoint records."""
    out = []
    with open(path) as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                out.append(Keypoint(
                    source=rec["source"],
                    face_index=rec.get("face_index"),
                    u=float(rec["u"]), v=float(rec["v"]),
                    scale=float(rec["scale"]),
                    orientation=float(rec["orientation"]),
                    descriptor=_descriptor_from_b64(rec.get("descriptor")),
                    lat=rec.get("lat"), lon=rec.get("lon")))
            except (KeyError, ValueError, TypeError) as exc:
                raise InvalidArgumentError(
                    f"{path}:{line_no}: malformed keypoint record") from exc
    return out


def save_keypoints(kps: Sequence[Keypoint], path: str) -> None:
    with open(path, "w") as fh:
        for kp in kps:
            rec = {"source": kp.source, "u": kp.u, "v": kp.v,
                   "scale": kp.scale, "orientation": kp.orientation}
            if kp.face_index is not None:
                rec["face_index"] = kp.face_index
            if kp.descriptor is not None:
                rec["descriptor"] = _descriptor_to_b64(kp.descriptor)
            if kp.lat is not None:
                rec["lat"] = kp.lat
                rec["lon"] = kp.lon
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
