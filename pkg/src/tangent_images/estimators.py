"""scikit-learn style wrappers so the resampling core composes with
pipelines and grid search: stateless transformers over plain arrays with
``get_params`` / ``set_params`` support.
"""

from __future__ import annotations

from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .camnorm import (
    CameraIntrinsics,
    make_target,
    normalize_camera,
    sample_shift,
)
from .errors import InvalidArgumentError
from .images import ChannelSemantics, EquirectImage
from .resample import INTERP_MODES, from_tangent, to_tangent


def validate_equirect_array(X) -> np.ndarray:
    """Check a (H, W[, C]) panorama array: 2:1 aspect, power-of-two height,
    finite values. Returns a float64 (H, W, C) view."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 2:
        X = X[:, :, None]
    if X.ndim != 3:
        raise InvalidArgumentError(
            f"expected an (H, W) or (H, W, C) array, got shape {X.shape}")
    h, w = X.shape[:2]
    if w != 2 * h:
        raise InvalidArgumentError(f"panorama must be 2:1, got {h}x{w}")
    if h < 2 or h & (h - 1):
        raise InvalidArgumentError(f"height {h} must be a power of two >= 2")
    if not np.all(np.isfinite(X)):
        raise InvalidArgumentError("panorama samples must be finite")
    return X


def validate_tangent_array(X) -> np.ndarray:
    """Check an (N, d, d[, C]) tangent-image stack: face count 20*4**b for
    some b, square power-of-two grids."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 3:
        X = X[:, :, :, None]
    if X.ndim != 4 or X.shape[1] != X.shape[2]:
        raise InvalidArgumentError(
            f"expected an (N, d, d[, C]) array, got shape {X.shape}")
    n, d = X.shape[0], X.shape[1]
    b, count = 0, 20
    while count < n:
        b, count = b + 1, count * 4
    if count != n:
        raise InvalidArgumentError(
            f"{n} images is not 20*4**b for any base level")
    if d & (d - 1):
        raise InvalidArgumentError(f"grid dimension {d} must be a power of two")
    return X


class TangentImageResampler(TransformerMixin, BaseEstimator):
    """Transformer between equirectangular panoramas and tangent-image stacks.

    Parameters
    ----------
    base_level : int, default=0
        Icosahedron subdivision level whose faces anchor the tangent images.
    interp : {"bilinear", "nearest"}, default="bilinear"
        Interpolation used in both rendering directions.
    threads : int or None, default=None
        Worker threads; None picks the hardware default. Results do not
        depend on this value.

    The transform is deterministic and nothing is learned from data; ``fit``
    only validates parameters.
    """

    def __init__(self, base_level: int = 0, interp: str = "bilinear",
                 threads: Optional[int] = None):
        self.base_level = base_level
        self.interp = interp
        self.threads = threads

    def fit(self, X=None, y=None):
        if self.interp not in INTERP_MODES:
            raise InvalidArgumentError(
                f"interp must be one of {INTERP_MODES}, got {self.interp!r}")
        if self.base_level < 0:
            raise InvalidArgumentError("base_level must be >= 0")
        self._fitted = True
        return self

    def transform(self, X) -> np.ndarray:
        """Panorama (H, W[, C]) -> tangent stack (N, d, d, C)."""
        self.fit()
        X = validate_equirect_array(X)
        img = EquirectImage(X, ChannelSemantics("color8"))
        tset = to_tangent(img, self.base_level, self.interp, threads=self.threads)
        return tset.images

    def inverse_transform(self, X) -> np.ndarray:
        """Tangent stack (N, d, d[, C]) -> panorama (H, W, C). The output
        height is implied by the grid size and base level."""
        self.fit()
        X = validate_tangent_array(X)
        # Rebuild the set's geometry from shape alone: d = 2**(s - b).
        from .gnomonic import make_plane_specs
        from .icosphere import build_icosphere

        n, d = X.shape[0], X.shape[1]
        b, count = 0, 20
        while count < n:
            b, count = b + 1, count * 4
        if b != self.base_level:
            raise InvalidArgumentError(
                f"{n} images implies base level {b}, but base_level={self.base_level}")
        s = b + int(d).bit_length() - 1
        from .images import TangentImageSet

        specs = make_plane_specs(build_icosphere(b), s)
        tset = TangentImageSet(
            specs=specs, images=X, semantics=ChannelSemantics("color8"),
            provenance={"interp": self.interp,
                        "source_height": 2 ** (s + 1),
                        "source_width": 2 ** (s + 2)})
        return from_tangent(tset, 2 ** (s + 1), threads=self.threads).samples


class CameraNormalizer(TransformerMixin, BaseEstimator):
    """Resample perspective images to a common spherical angular resolution.

    Parameters
    ----------
    intrinsics : dict or CameraIntrinsics
        Source camera ({fx, fy, cx, cy, width, height}).
    spherical_level : int, default=8
        Target spherical input level; sets the angular resolution.
    fov : float, default=pi/4
        Requested field of view of the normalized crop, radians.
    seed : int or None, default=None
        Seed for the random principal-point shift; None keeps the crop
        centered (zero shift only if legal).
    interp : {"bilinear", "nearest"}, default="bilinear"
    """

    def __init__(self, intrinsics=None, spherical_level: int = 8,
                 fov: float = np.pi / 4, seed: Optional[int] = None,
                 interp: str = "bilinear"):
        self.intrinsics = intrinsics
        self.spherical_level = spherical_level
        self.fov = fov
        self.seed = seed
        self.interp = interp

    def fit(self, X=None, y=None):
        if self.intrinsics is None:
            raise InvalidArgumentError("CameraNormalizer needs source intrinsics")
        cam = (self.intrinsics if isinstance(self.intrinsics, CameraIntrinsics)
               else CameraIntrinsics.from_json(dict(self.intrinsics)))
        target = make_target(self.spherical_level, self.fov)
        if self.seed is None:
            shift = (0.0, 0.0)
        else:
            shift = sample_shift(cam, target, self.seed)
        self.map_ = normalize_camera(cam, target, shift)
        self.shift_ = shift
        self.target_ = target
        return self

    def transform(self, X) -> np.ndarray:
        if not hasattr(self, "map_"):
            self.fit()
        X = np.asarray(X, dtype=np.float64)
        squeeze = X.ndim == 2
        out = self.map_.apply(X, interp=self.interp)
        return out[:, :, 0] if squeeze else out
