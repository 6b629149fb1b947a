"""Image containers, channel semantics, and PNG input/output.

Conversion rules between stored integers and in-memory floats:

  - color8 / color16: float = value / maxint; saving quantizes with
    round-half-up and refuses values outside [0, 1].
  - label8: float carries the integer value unchanged; round trips are
    bit-exact.
  - depth16: float = value * depth_scale in meters; the invalid_value
    sentinel (default 65535) maps to NaN and back.

The equirectangular pixel convention used throughout: pixel (i, j) has its
center at lat = pi*(0.5 - (i+0.5)/H), lon = 2*pi*((j+0.5)/W - 0.5), so row 0
is the top of the panorama and column 0 the -pi meridian.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from typing import Optional

import cv2
import numpy as np

from .errors import (
    AspectError,
    BitDepthError,
    EncodeRangeError,
    InvalidArgumentError,
    MetaFormatError,
    MissingFaceError,
    UnreadableFileError,
)
from .gnomonic import SphericalCoord, TangentPlaneSpec, wrap_longitude

_KINDS = ("color8", "color16", "label8", "depth16")


@dataclass(frozen=True)
class ChannelSemantics:
    """How stored integer samples relate to in-memory float values."""

    kind: str = "color8"
    depth_scale: float = 1.0 / 512.0
    invalid_value: int = 65535

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise InvalidArgumentError(
                f"unknown channel semantics {self.kind!r}; expected one of {_KINDS}")
        if self.depth_scale <= 0:
            raise InvalidArgumentError("depth_scale must be positive")

    @property
    def dtype(self):
        return np.uint8 if self.kind in ("color8", "label8") else np.uint16

    @property
    def maxint(self) -> int:
        return 255 if self.kind in ("color8", "label8") else 65535

    @property
    def interp_default(self) -> str:
        return "nearest" if self.kind == "label8" else "bilinear"

    def to_json(self) -> dict:
        out = {"kind": self.kind}
        if self.kind == "depth16":
            out["depth_scale"] = self.depth_scale
            out["invalid_value"] = self.invalid_value
        return out

    @staticmethod
    def from_json(obj) -> "ChannelSemantics":
        if isinstance(obj, str):
            return ChannelSemantics(kind=obj)
        kwargs = {"kind": obj["kind"]}
        if "depth_scale" in obj:
            kwargs["depth_scale"] = float(obj["depth_scale"])
        if "invalid_value" in obj:
            kwargs["invalid_value"] = int(obj["invalid_value"])
        return ChannelSemantics(**kwargs)


def _round_half_up(x: np.ndarray) -> np.ndarray:
    return np.floor(x + 0.5)


def decode_samples(raw: np.ndarray, semantics: ChannelSemantics) -> np.ndarray:
    """Stored integers -> float64 samples per the semantics rules."""
    raw = np.asarray(raw)
    if semantics.kind in ("color8", "color16"):
        return raw.astype(np.float64) / semantics.maxint
    if semantics.kind == "label8":
        return raw.astype(np.float64)
    out = raw.astype(np.float64) * semantics.depth_scale
    out[raw == semantics.invalid_value] = np.nan
    return out


def encode_samples(samples: np.ndarray, semantics: ChannelSemantics) -> np.ndarray:
    """Float samples -> stored integers. Raises EncodeRangeError when a
    value cannot be represented."""
    s = np.asarray(samples, dtype=np.float64)
    if semantics.kind in ("color8", "color16"):
        if not np.all(np.isfinite(s)):
            raise EncodeRangeError("color samples must be finite")
        if s.min() < -1e-12 or s.max() > 1.0 + 1e-12:
            raise EncodeRangeError(
                f"color samples outside [0, 1]: range [{s.min():.6g}, {s.max():.6g}]")
        q = _round_half_up(np.clip(s, 0.0, 1.0) * semantics.maxint)
        return q.astype(semantics.dtype)
    if semantics.kind == "label8":
        if not np.all(np.isfinite(s)):
            raise EncodeRangeError("label samples must be finite")
        q = _round_half_up(s)
        if np.any(np.abs(q - s) > 1e-9) or q.min() < 0 or q.max() > 255:
            raise EncodeRangeError("label samples must be integers in [0, 255]")
        return q.astype(np.uint8)
    # depth16
    nan = ~np.isfinite(s)
    q = _round_half_up(np.where(nan, 0.0, s) / semantics.depth_scale)
    if q.min() < 0 or np.any(q[~nan] >= semantics.invalid_value):
        raise EncodeRangeError(
            "depth samples outside the encodable range "
            f"[0, {(semantics.invalid_value - 1) * semantics.depth_scale:.6g}] m")
    q = q.astype(np.uint16)
    q[nan] = semantics.invalid_value
    return q


@dataclass
class EquirectImage:
    """A full-sphere 2:1 panorama: (H, W, C) float samples plus semantics."""

    samples: np.ndarray
    semantics: ChannelSemantics = field(default_factory=ChannelSemantics)

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.float64)
        if s.ndim == 2:
            s = s[:, :, None]
        if s.ndim != 3:
            raise InvalidArgumentError(
                f"samples must be (H, W) or (H, W, C), got shape {s.shape}")
        h, w = s.shape[:2]
        if w != 2 * h:
            raise AspectError(f"equirectangular image must be 2:1, got {h}x{w}")
        self.samples = s

    @property
    def height(self) -> int:
        return self.samples.shape[0]

    @property
    def width(self) -> int:
        return self.samples.shape[1]

    @property
    def channels(self) -> int:
        return self.samples.shape[2]

    def source_level(self) -> int:
        """Subdivision level s such that H = 2**(s+1). Raises if H is not a
        power of two >= 2."""
        h = self.height
        if h < 2 or h & (h - 1):
            raise InvalidArgumentError(
                f"height {h} is not a power of two >= 2; no spherical level matches")
        return int(h.bit_length() - 2)


def pixel_to_latlon(i, j, height: int, width: int):
    """Continuous pixel indices -> (lat, lon) at pixel centers."""
    i = np.asarray(i, dtype=np.float64)
    j = np.asarray(j, dtype=np.float64)
    lat = np.pi * (0.5 - (i + 0.5) / height)
    lon = 2.0 * np.pi * ((j + 0.5) / width - 0.5)
    return lat, lon


def latlon_to_pixel(lat, lon, height: int, width: int):
    """(lat, lon) -> continuous pixel indices (i, j); longitude wraps."""
    lat = np.asarray(lat, dtype=np.float64)
    lon = wrap_longitude(lon)
    i = (0.5 - lat / np.pi) * height - 0.5
    j = (lon / (2.0 * np.pi) + 0.5) * width - 0.5
    return i, j


def equirect_grid(height: int, width: int):
    """(lat column, lon row) vectors of all pixel-center coordinates."""
    lat, _ = pixel_to_latlon(np.arange(height), np.zeros(height), height, width)
    _, lon = pixel_to_latlon(np.zeros(width), np.arange(width), height, width)
    return lat, lon


@dataclass
class TangentImageSet:
    """The rendered tangent images of one panorama plus their geometry.

    images is (N, d, d, C) float64 aligned with specs; provenance records
    the source dimensions and the interpolation used to build the set, and
    is what a later render back to the sphere mirrors.
    """

    specs: list
    images: np.ndarray
    semantics: ChannelSemantics
    provenance: dict

    def __post_init__(self):
        img = np.asarray(self.images, dtype=np.float64)
        if img.ndim != 4 or img.shape[1] != img.shape[2]:
            raise InvalidArgumentError(
                f"images must be (N, d, d, C), got shape {img.shape}")
        if len(self.specs) != img.shape[0]:
            raise InvalidArgumentError(
                f"{len(self.specs)} specs but {img.shape[0]} images")
        if self.specs and self.specs[0].dim != img.shape[1]:
            raise InvalidArgumentError(
                f"spec dim {self.specs[0].dim} != image dim {img.shape[1]}")
        self.images = img

    @property
    def base_level(self) -> int:
        return self.specs[0].base_level

    @property
    def source_level(self) -> int:
        return self.specs[0].source_level

    @property
    def dim(self) -> int:
        return self.images.shape[1]

    @property
    def interp(self) -> str:
        return self.provenance.get("interp", self.semantics.interp_default)


# ---------------------------------------------------------------------------
# PNG files


def _read_png(path: str) -> np.ndarray:
    if not os.path.isfile(path):
        raise UnreadableFileError(f"no such file: {path}")
    raw = cv2.imread(path, cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise UnreadableFileError(f"could not decode raster: {path}")
    if raw.ndim == 3:
        if raw.shape[2] == 4:
            raw = cv2.cvtColor(raw, cv2.COLOR_BGRA2BGR)
        raw = raw[:, :, ::-1]  # BGR -> RGB
    return raw


def _write_png(path: str, data: np.ndarray) -> None:
    if data.ndim == 3 and data.shape[2] == 3:
        data = data[:, :, ::-1]  # RGB -> BGR
    elif data.ndim == 3 and data.shape[2] == 1:
        data = data[:, :, 0]
    elif data.ndim == 3:
        raise InvalidArgumentError(
            f"only 1- or 3-channel rasters are supported, got {data.shape[2]}")
    ok, buf = cv2.imencode(".png", np.ascontiguousarray(data))
    if not ok:
        raise UnreadableFileError(f"PNG encoding failed for {path}")
    with open(path, "wb") as fh:
        fh.write(buf.tobytes())


def _check_bit_depth(raw: np.ndarray, semantics: ChannelSemantics, path: str):
    if raw.dtype != semantics.dtype:
        raise BitDepthError(
            f"{path}: stored dtype {raw.dtype} does not match semantics "
            f"{semantics.kind!r} (expected {np.dtype(semantics.dtype)})")
    if semantics.kind in ("label8", "depth16") and raw.ndim == 3:
        raise BitDepthError(f"{path}: {semantics.kind} rasters must be single-channel")


def load_equirect(path: str, semantics: ChannelSemantics) -> EquirectImage:
    """Load a 2:1 PNG panorama and convert to float samples."""
    raw = _read_png(path)
    _check_bit_depth(raw, semantics, path)
    if raw.ndim == 2:
        raw = raw[:, :, None]
    if raw.shape[1] != 2 * raw.shape[0]:
        raise AspectError(
            f"{path}: expected a 2:1 panorama, got {raw.shape[0]}x{raw.shape[1]}")
    return EquirectImage(decode_samples(raw, semantics), semantics)


def save_equirect(img: EquirectImage, path: str) -> None:
    """Quantize and write a panorama as PNG per its semantics."""
    _write_png(path, encode_samples(img.samples, img.semantics))


# ---------------------------------------------------------------------------
# Tangent-set directories: face_00000.png ... plus meta.json

META_NAME = "meta.json"


def _face_name(k: int) -> str:
    return f"face_{k:05d}.png"


def tangent_set_meta(tset: TangentImageSet) -> dict:
    faces = [
        {
            "center_lat_deg": math.degrees(spec.center.lat),
            "center_lon_deg": math.degrees(spec.center.lon),
            "half_extent": spec.half_extent,
        }
        for spec in tset.specs
    ]
    return {
        "base_level": tset.base_level,
        "source_level": tset.source_level,
        "dim": tset.dim,
        "interp": tset.interp,
        "channel_semantics": tset.semantics.to_json(),
        "faces": faces,
    }


def save_tangent_set(tset: TangentImageSet, out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    for k in range(len(tset.specs)):
        _write_png(os.path.join(out_dir, _face_name(k)),
                   encode_samples(tset.images[k], tset.semantics))
    meta = tangent_set_meta(tset)
    with open(os.path.join(out_dir, META_NAME), "w") as fh:
        json.dump(meta, fh, indent=1, sort_keys=True)
        fh.write("\n")


def specs_from_meta(meta: dict) -> list:
    b = int(meta["base_level"])
    s = int(meta["source_level"])
    d = int(meta["dim"])
    specs = []
    for k, face in enumerate(meta["faces"]):
        specs.append(TangentPlaneSpec(
            face_index=k,
            center=SphericalCoord(math.radians(face["center_lat_deg"]),
                                  math.radians(face["center_lon_deg"])),
            dim=d,
            half_extent=float(face["half_extent"]),
            base_level=b,
            source_level=s,
        ))
    return specs


def load_tangent_set(in_dir: str) -> TangentImageSet:
    meta_path = os.path.join(in_dir, META_NAME)
    if not os.path.isfile(meta_path):
        raise MetaFormatError(f"missing {META_NAME} in {in_dir}")
    try:
        with open(meta_path) as fh:
            meta = json.load(fh)
        specs = specs_from_meta(meta)
        semantics = ChannelSemantics.from_json(meta["channel_semantics"])
        interp = meta["interp"]
    except (KeyError, ValueError, TypeError, InvalidArgumentError) as exc:
        raise MetaFormatError(f"invalid {META_NAME} in {in_dir}: {exc}") from exc

    expected = 20 * 4 ** specs[0].base_level
    if len(specs) != expected:
        raise MetaFormatError(
            f"{meta_path} lists {len(specs)} faces; base level "
            f"{specs[0].base_level} requires {expected}")

    d = specs[0].dim
    images = None
    for k in range(len(specs)):
        face_path = os.path.join(in_dir, _face_name(k))
        if not os.path.isfile(face_path):
            raise MissingFaceError(f"missing face file: {face_path}")
        raw = _read_png(face_path)
        _check_bit_depth(raw, semantics, face_path)
        if raw.ndim == 2:
            raw = raw[:, :, None]
        if raw.shape[0] != d or raw.shape[1] != d:
            raise MetaFormatError(
                f"{face_path}: expected {d}x{d} per meta.json, got "
                f"{raw.shape[0]}x{raw.shape[1]}")
        if images is None:
            images = np.empty((len(specs), d, d, raw.shape[2]), dtype=np.float64)
        elif raw.shape[2] != images.shape[3]:
            raise MetaFormatError(f"{face_path}: inconsistent channel count")
        images[k] = decode_samples(raw, semantics)

    provenance = {"interp": interp,
                  "source_height": 2 ** (specs[0].source_level + 1),
                  "source_width": 2 ** (specs[0].source_level + 2)}
    return TangentImageSet(specs=specs, images=images,
                           semantics=semantics, provenance=provenance)
