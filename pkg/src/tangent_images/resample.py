"""Rendering between equirectangular panoramas and tangent-image sets.

Rendering to the sphere uses hard base-face ownership as the visibility
rule: every output direction is sampled from exactly one tangent image, the
one whose base face contains it. No blending happens at face seams.

All work is split into disjoint chunks (faces or row bands), so results are
bit-identical regardless of the number of worker threads.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

import numpy as np

from .errors import CoverageViolationError, InvalidArgumentError
from .gnomonic import (
    gnomonic_forward,
    make_plane_specs,
    plane_pixel_grid,
    plane_to_pixel,
    unit_vectors,
)
from .icosphere import build_icosphere, owning_faces
from .images import (
    EquirectImage,
    TangentImageSet,
    equirect_grid,
    latlon_to_pixel,
)

INTERP_MODES = ("bilinear", "nearest")

#: Environment fallback for the worker-thread count.
THREADS_ENV = "TANGENT_THREADS"


def resolve_threads(threads: Optional[int]) -> int:
    if threads is None:
        env = os.environ.get(THREADS_ENV)
        if env:
            try:
                threads = int(env)
            except ValueError:
                raise InvalidArgumentError(
                    f"{THREADS_ENV} must be an integer, got {env!r}")
        else:
            threads = os.cpu_count() or 1
    if threads < 1:
        raise InvalidArgumentError(f"threads must be >= 1, got {threads}")
    return int(threads)


def _run_chunks(worker, chunks, threads: int) -> None:
    if threads <= 1 or len(chunks) <= 1:
        for c in chunks:
            worker(c)
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        list(pool.map(worker, chunks))


def _check_interp(interp: str) -> str:
    if interp not in INTERP_MODES:
        raise InvalidArgumentError(
            f"interp must be one of {INTERP_MODES}, got {interp!r}")
    return interp


def sample_image(samples: np.ndarray, x, y, interp: str, wrap_x: bool) -> np.ndarray:
    """Sample an (H, W, C) image at fractional pixel indices (x, y).

    x wraps modulo the width when wrap_x is set (longitude seam), otherwise
    it clamps like y does. Bilinear output is a convex combination of the
    four taps; nearest output copies a source sample exactly.
    """
    h, w, c = samples.shape
    flat = samples.reshape(h * w, c)
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)

    def col(ix):
        return np.mod(ix, w) if wrap_x else np.clip(ix, 0, w - 1)

    if interp == "nearest":
        xi = col(np.floor(x + 0.5).astype(np.int64))
        yi = np.clip(np.floor(y + 0.5).astype(np.int64), 0, h - 1)
        return flat[yi * w + xi]

    x0 = np.floor(x)
    y0 = np.floor(y)
    tx = (x - x0)[..., None]
    ty = (y - y0)[..., None]
    x0 = x0.astype(np.int64)
    y0 = y0.astype(np.int64)
    x0c, x1c = col(x0), col(x0 + 1)
    y0c = np.clip(y0, 0, h - 1)
    y1c = np.clip(y0 + 1, 0, h - 1)
    v00 = flat[y0c * w + x0c]
    v01 = flat[y0c * w + x1c]
    v10 = flat[y1c * w + x0c]
    v11 = flat[y1c * w + x1c]
    top = v00 + (v01 - v00) * tx
    bot = v10 + (v11 - v10) * tx
    return top + (bot - top) * ty


def to_tangent(img: EquirectImage, base_level: int, interp: Optional[str] = None,
               threads: Optional[int] = None) -> TangentImageSet:
    """Render a panorama onto the tangent planes of its base-level faces.

    The panorama height must be a power of two so its spherical level s is
    defined; each face gets a 2**(s - base_level) square grid.
    """
    s = img.source_level()
    if base_level > s:
        raise InvalidArgumentError(
            f"base_level {base_level} exceeds the input's spherical level {s}")
    if interp is None:
        interp = img.semantics.interp_default
    _check_interp(interp)
    threads = resolve_threads(threads)

    sphere = build_icosphere(base_level)
    specs = make_plane_specs(sphere, s)
    d = specs[0].dim
    h, w, c = img.samples.shape
    images = np.empty((len(specs), d, d, c), dtype=np.float64)

    def render_face(k: int) -> None:
        grid = plane_pixel_grid(specs[k])
        px_i, px_j = latlon_to_pixel(grid[..., 0], grid[..., 1], h, w)
        images[k] = sample_image(img.samples, px_j, px_i, interp, wrap_x=True)

    _run_chunks(render_face, range(len(specs)), threads)

    provenance = {"interp": interp, "source_height": h, "source_width": w}
    return TangentImageSet(specs=specs, images=images,
                           semantics=img.semantics, provenance=provenance)


def from_tangent(tset: TangentImageSet, out_height: int,
                 threads: Optional[int] = None) -> EquirectImage:
    """Render a tangent-image set back to an equirectangular panorama.

    Every output pixel is written exactly once, from the tangent image of
    the base face that owns the pixel's direction. Raises
    CoverageViolationError if a direction projects outside its owner's grid,
    which the coverage guarantee makes impossible for well-formed sets.
    """
    if out_height < 2 or out_height & (out_height - 1):
        raise InvalidArgumentError(
            f"out_height must be a power of two >= 2, got {out_height}")
    threads = resolve_threads(threads)
    interp = _check_interp(tset.interp)

    sphere = build_icosphere(tset.base_level)
    nf = sphere.num_faces
    if len(tset.specs) != nf:
        raise InvalidArgumentError(
            f"{len(tset.specs)} tangent images but base level "
            f"{tset.base_level} has {nf} faces")

    h = int(out_height)
    w = 2 * h
    c = tset.images.shape[3]
    d = tset.dim
    lat_col, lon_row = equirect_grid(h, w)
    out = np.empty((h, w, c), dtype=np.float64)

    # Row bands are separately owned, projected, and sampled; bands are
    # disjoint so scheduling order cannot matter.
    band = max(1, min(h, 4194304 // w))
    bands = [(r0, min(r0 + band, h)) for r0 in range(0, h, band)]

    def render_band(rows) -> None:
        r0, r1 = rows
        lat = np.repeat(lat_col[r0:r1], w)
        lon = np.tile(lon_row, r1 - r0)
        dirs = unit_vectors(lat, lon)
        owner = owning_faces(sphere, dirs)
        block = np.empty(((r1 - r0) * w, c), dtype=np.float64)
        for k in np.unique(owner):
            spec = tset.specs[k]
            mask = owner == k
            x, y = gnomonic_forward(spec.center, lat[mask], lon[mask])
            if d > 1:
                limit = spec.half_extent * (1.0 + 1e-9) + 1e-12
                if max(np.abs(x).max(), np.abs(y).max()) > limit:
                    raise CoverageViolationError(
                        f"direction owned by face {k} projects outside its "
                        f"grid bounds (|coord| up to "
                        f"{max(np.abs(x).max(), np.abs(y).max()):.6g} > "
                        f"{spec.half_extent:.6g})")
            px_x, px_y = plane_to_pixel(spec, x, y)
            block[mask] = sample_image(tset.images[k], px_x, px_y,
                                       interp, wrap_x=False)
        out[r0:r1] = block.reshape(r1 - r0, w, c)

    _run_chunks(render_band, bands, threads)
    return EquirectImage(out, tset.semantics)


def ownership_map(base_level: int, height: int, width: Optional[int] = None) -> np.ndarray:
    """(H, W) int64 map of which base face owns each equirect pixel."""
    w = 2 * height if width is None else width
    lat_col, lon_row = equirect_grid(height, w)
    lat = np.repeat(lat_col, w)
    lon = np.tile(lon_row, height)
    sphere = build_icosphere(base_level)
    return owning_faces(sphere, unit_vectors(lat, lon)).reshape(height, w)
