"""Perspective-camera normalization to a target spherical angular resolution.

A perspective image with intrinsics K is resampled to a virtual camera K'
whose angular resolution matches a spherical input level. The mapping from
target pixels back into the source image is the affine

    src = K (K')^-1 [x', y', 1]^T + (dx, dy)

where (dx, dy) is an optional principal-point shift that moves the crop
window around the source; its legal range keeps the full target footprint
inside the source bounds. Pixel coordinates here are corner-based: (0, 0)
is the image's top-left corner and pixel (i, j) has center (j+0.5, i+0.5).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import InvalidArgumentError, SourceTooNarrowError
from .resample import sample_image


@dataclass(frozen=True)
class CameraIntrinsics:
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise InvalidArgumentError("focal lengths must be positive")
        if self.width < 1 or self.height < 1:
            raise InvalidArgumentError("image dimensions must be >= 1")

    @staticmethod
    def from_json(obj: dict) -> "CameraIntrinsics":
        try:
            return CameraIntrinsics(
                fx=float(obj["fx"]), fy=float(obj["fy"]),
                cx=float(obj["cx"]), cy=float(obj["cy"]),
                width=int(obj["width"]), height=int(obj["height"]))
        except KeyError as exc:
            raise InvalidArgumentError(f"intrinsics JSON missing field {exc}") from exc

    def to_json(self) -> dict:
        return {"fx": self.fx, "fy": self.fy, "cx": self.cx, "cy": self.cy,
                "width": self.width, "height": self.height}


def angular_resolution(cam: CameraIntrinsics) -> Tuple[float, float]:
    """Per-axis angular resolution in radians per pixel: the full-axis field
    of view 2*arctan(dim / (2 f)) divided by the dimension."""
    ax = 2.0 * math.atan(cam.width / (2.0 * cam.fx)) / cam.width
    ay = 2.0 * math.atan(cam.height / (2.0 * cam.fy)) / cam.height
    return ax, ay


@dataclass(frozen=True)
class NormalizationTarget:
    """Square virtual camera with uniform angular resolution alpha.

    out_dim = round(fov / alpha); the effective field of view is
    alpha * out_dim, which round-off keeps within 0.5% of the request.
    """

    alpha: float
    fov: float
    out_dim: int

    def __post_init__(self):
        if self.alpha <= 0 or not 0 < self.fov < math.pi:
            raise InvalidArgumentError("need alpha > 0 and 0 < fov < pi")
        if self.out_dim != int(math.floor(self.fov / self.alpha + 0.5)):
            raise InvalidArgumentError("out_dim must equal round(fov / alpha)")
        if self.out_dim < 1:
            raise InvalidArgumentError("target resolves to zero pixels")
        if abs(self.fov / self.out_dim - self.alpha) > 0.005 * self.alpha:
            raise InvalidArgumentError(
                "fov / out_dim strays more than 0.5% from alpha; "
                "choose a fov closer to a multiple of alpha")

    @property
    def effective_fov(self) -> float:
        return self.alpha * self.out_dim

    def virtual_camera(self) -> CameraIntrinsics:
        f = self.out_dim / (2.0 * math.tan(self.effective_fov / 2.0))
        half = self.out_dim / 2.0
        return CameraIntrinsics(fx=f, fy=f, cx=half, cy=half,
                                width=self.out_dim, height=self.out_dim)


def make_target(spherical_level: int, fov: float) -> NormalizationTarget:
    """Target matching the uniform angular resolution of a level-s sphere:
    alpha = 2*pi over the level-s equirect width 2**(s+2)."""
    if spherical_level < 0:
        raise InvalidArgumentError("spherical_level must be >= 0")
    if not 0 < fov < math.pi:
        raise InvalidArgumentError("fov must lie in (0, pi)")
    alpha = 2.0 * math.pi / (4.0 * 2 ** int(spherical_level))
    out_dim = int(math.floor(fov / alpha + 0.5))
    return NormalizationTarget(alpha=alpha, fov=float(fov), out_dim=out_dim)


def shift_ranges(src: CameraIntrinsics, target: NormalizationTarget):
    """Closed legal intervals for the principal-point shift, per axis."""
    virt = target.virtual_camera()
    rx = src.fx / virt.fx
    ry = src.fy / virt.fy
    lo_x = rx * virt.cx - src.cx
    hi_x = src.width - src.cx - rx * (virt.width - virt.cx)
    lo_y = ry * virt.cy - src.cy
    hi_y = src.height - src.cy - ry * (virt.height - virt.cy)
    return (lo_x, hi_x), (lo_y, hi_y)


@dataclass(frozen=True)
class PixelMap:
    """Affine map from target pixel coordinates to source pixel coordinates:
    src_x = scale_x * x' + offset_x (and likewise for y)."""

    scale_x: float
    scale_y: float
    offset_x: float
    offset_y: float
    src: CameraIntrinsics
    target: NormalizationTarget

    def __call__(self, x, y):
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        return self.scale_x * x + self.offset_x, self.scale_y * y + self.offset_y

    def footprint(self) -> Tuple[float, float, float, float]:
        """(x_min, y_min, x_max, y_max) of the mapped target rectangle in
        source pixel coordinates."""
        w, h = self.target.out_dim, self.target.out_dim
        xs, ys = self([0.0, w], [0.0, h])
        return (float(min(xs)), float(min(ys)), float(max(xs)), float(max(ys)))

    def footprint_in_bounds(self, tol: float = 1e-9) -> bool:
        x0, y0, x1, y1 = self.footprint()
        return (x0 >= -tol and y0 >= -tol
                and x1 <= self.src.width + tol and y1 <= self.src.height + tol)

    def apply(self, samples: np.ndarray, interp: str = "bilinear") -> np.ndarray:
        """Resample an (H, W, C) source image into the target frame."""
        samples = np.asarray(samples, dtype=np.float64)
        if samples.ndim == 2:
            samples = samples[:, :, None]
        if samples.shape[0] != self.src.height or samples.shape[1] != self.src.width:
            raise InvalidArgumentError(
                f"image is {samples.shape[0]}x{samples.shape[1]} but intrinsics "
                f"say {self.src.height}x{self.src.width}")
        n = self.target.out_dim
        jj, ii = np.meshgrid(np.arange(n), np.arange(n))
        sx, sy = self(jj + 0.5, ii + 0.5)
        # Corner-based source coords -> fractional pixel indices.
        return sample_image(samples, sx - 0.5, sy - 0.5, interp, wrap_x=False)


def normalize_camera(src: CameraIntrinsics, target: NormalizationTarget,
                     shift: Tuple[float, float] = (0.0, 0.0)) -> PixelMap:
    """Build the target-to-source pixel map for a given shift.

    Raises InvalidArgumentError when the shift leaves the legal range (the
    message carries the computed interval).
    """
    (lo_x, hi_x), (lo_y, hi_y) = shift_ranges(src, target)
    dx, dy = float(shift[0]), float(shift[1])
    tol = 1e-9
    if not (lo_x - tol <= dx <= hi_x + tol) or not (lo_y - tol <= dy <= hi_y + tol):
        raise InvalidArgumentError(
            f"shift ({dx:.6g}, {dy:.6g}) outside the legal ranges "
            f"dx in [{lo_x:.6g}, {hi_x:.6g}], dy in [{lo_y:.6g}, {hi_y:.6g}]")
    virt = target.virtual_camera()
    sx = src.fx / virt.fx
    sy = src.fy / virt.fy
    return PixelMap(
        scale_x=sx, scale_y=sy,
        offset_x=src.cx - sx * virt.cx + dx,
        offset_y=src.cy - sy * virt.cy + dy,
        src=src, target=target)


def sample_shift(src: CameraIntrinsics, target: NormalizationTarget,
                 rng_seed: int) -> Tuple[float, float]:
    """Draw a uniform shift from the closed legal intervals, deterministically
    for a given seed (dx first, then dy)."""
    (lo_x, hi_x), (lo_y, hi_y) = shift_ranges(src, target)
    if hi_x < lo_x - 1e-9 or hi_y < lo_y - 1e-9:
        raise SourceTooNarrowError(
            "source field of view is narrower than the target; legal shift "
            f"ranges dx in [{lo_x:.6g}, {hi_x:.6g}], dy in [{lo_y:.6g}, {hi_y:.6g}] "
            "are empty")
    rng = np.random.default_rng(rng_seed)

    def draw(lo, hi):
        if hi <= lo:
            return lo  # zero-width interval: the shift is forced
        return float(rng.uniform(lo, hi))

    return draw(lo_x, hi_x), draw(lo_y, hi_y)
