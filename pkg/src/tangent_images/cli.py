"""Command-line pipeline over the library: convert panoramas to tangent-image
sets and back, inspect icosphere geometry, normalize perspective cameras, and
evaluate keypoint files.

Errors leave via a machine-readable JSON object on stderr with a stable
``code`` string; the exit code reflects the error family.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from typing import Optional

import numpy as np

from . import camnorm as cn
from . import features as ft
from . import icosphere as ico
from .errors import InvalidArgumentError, TangentImageError, exit_code_for
from .gnomonic import make_plane_specs
from .images import (
    ChannelSemantics,
    EquirectImage,
    load_equirect,
    load_tangent_set,
    save_equirect,
    save_tangent_set,
    specs_from_meta,
    tangent_set_meta,
)
from .manifest import build_manifest, manifest_path_for, write_manifest
from .resample import from_tangent, to_tangent


def _print_json(obj) -> None:
    sys.stdout.write(json.dumps(obj) + "\n")


def _semantics_from_args(args) -> ChannelSemantics:
    kwargs = {"kind": args.channels}
    if getattr(args, "depth_scale", None) is not None:
        kwargs["depth_scale"] = args.depth_scale
    return ChannelSemantics(**kwargs)


def _cmd_icosphere_info(args) -> int:
    sphere = ico.build_icosphere(args.level)
    _print_json({
        "level": sphere.level,
        "vertices": sphere.num_vertices,
        "faces": sphere.num_faces,
        "edges": sphere.num_edges,
        "vertex_resolution_deg": math.degrees(ico.vertex_resolution(sphere)),
        "surface_area_ratio": ico.surface_area_ratio(sphere),
    })
    return 0


def _cmd_icosphere_plane_specs(args) -> int:
    sphere = ico.build_icosphere(args.base_level)
    specs = make_plane_specs(sphere, args.source_level)
    _print_json({
        "base_level": args.base_level,
        "source_level": args.source_level,
        "dim": specs[0].dim,
        "faces": [
            {"center_lat_deg": math.degrees(sp.center.lat),
             "center_lon_deg": math.degrees(sp.center.lon),
             "half_extent": sp.half_extent}
            for sp in specs
        ],
    })
    return 0


def _cmd_to_tangent(args) -> int:
    started = time.monotonic()
    semantics = _semantics_from_args(args)
    img = load_equirect(args.input, semantics)
    interp = args.interp
    if interp is None:
        interp = semantics.interp_default
    if args.exact_depth and semantics.kind == "depth16":
        interp = "nearest"
    tset = to_tangent(img, args.base_level, interp, threads=args.threads)
    save_tangent_set(tset, args.out)
    manifest = build_manifest(
        "to-tangent",
        {"input": args.input, "base_level": args.base_level, "out": args.out,
         "interp": interp, "channels": semantics.kind, "threads": args.threads},
        {"input": args.input},
        time.monotonic() - started)
    write_manifest(manifest, manifest_path_for(args.out))
    return 0


def _cmd_from_tangent(args) -> int:
    started = time.monotonic()
    tset = load_tangent_set(args.in_dir)
    img = from_tangent(tset, args.height, threads=args.threads)
    save_equirect(img, args.out)
    manifest = build_manifest(
        "from-tangent",
        {"in": args.in_dir, "height": args.height, "out": args.out,
         "threads": args.threads},
        {"in": args.in_dir},
        time.monotonic() - started)
    write_manifest(manifest, manifest_path_for(args.out))
    return 0


def _cmd_camnorm(args) -> int:
    started = time.monotonic()
    with open(args.intrinsics) as fh:
        cam = cn.CameraIntrinsics.from_json(json.load(fh))
    target = cn.make_target(args.level, math.radians(args.fov_deg))
    if args.seed is None:
        shift = (0.0, 0.0)
    else:
        shift = cn.sample_shift(cam, target, args.seed)
    pixel_map = cn.normalize_camera(cam, target, shift)

    semantics = _semantics_from_args(args)
    from .images import _check_bit_depth, _read_png, decode_samples, encode_samples, _write_png

    raw = _read_png(args.image)
    _check_bit_depth(raw, semantics, args.image)
    if raw.ndim == 2:
        raw = raw[:, :, None]
    samples = decode_samples(raw, semantics)
    out = pixel_map.apply(samples, interp=args.interp)
    _write_png(args.out, encode_samples(out, semantics))

    virt = target.virtual_camera()
    meta = {
        "fx": virt.fx, "fy": virt.fy, "cx": virt.cx, "cy": virt.cy,
        "width": virt.width, "height": virt.height,
        "alpha": target.alpha,
        "fov": target.effective_fov,
        "shift": [shift[0], shift[1]],
        "source_intrinsics": cam.to_json(),
    }
    with open(args.out_meta, "w") as fh:
        json.dump(meta, fh, indent=1, sort_keys=True)
        fh.write("\n")
    manifest = build_manifest(
        "camnorm",
        {"level": args.level, "fov_deg": args.fov_deg, "seed": args.seed,
         "intrinsics": args.intrinsics, "image": args.image,
         "out": args.out, "out_meta": args.out_meta},
        {"image": args.image, "intrinsics": args.intrinsics},
        time.monotonic() - started)
    write_manifest(manifest, manifest_path_for(args.out))
    return 0


def _cmd_kp_to_sphere(args) -> int:
    started = time.monotonic()
    with open(args.tangent_meta) as fh:
        specs = specs_from_meta(json.load(fh))
    kps = ft.load_keypoints(args.keypoints)
    kept = ft.keypoints_to_sphere(kps, specs)
    ft.save_keypoints(kept, args.out)
    manifest = build_manifest(
        "kp-to-sphere",
        {"keypoints": args.keypoints, "tangent_meta": args.tangent_meta,
         "out": args.out},
        {"keypoints": args.keypoints, "tangent_meta": args.tangent_meta},
        time.monotonic() - started)
    write_manifest(manifest, manifest_path_for(args.out))
    return 0


def _load_scene(path: str) -> ft.PosedSphericalImage:
    with open(path) as fh:
        scene = json.load(fh)
    try:
        depth_sem = ChannelSemantics(
            kind="depth16",
            depth_scale=float(scene.get("depth_scale", 1.0 / 512.0)),
            invalid_value=int(scene.get("invalid_value", 65535)))
        depth = load_equirect(scene["depth"], depth_sem)
        pose = scene["pose"]
        rotation = np.asarray(pose["rotation"], dtype=np.float64)
        translation = np.asarray(pose["translation"], dtype=np.float64)
    except KeyError as exc:
        raise InvalidArgumentError(f"{path}: scene JSON missing field {exc}") from exc
    return ft.PosedSphericalImage(depth=depth, rotation=rotation,
                                  translation=translation)


def _cmd_kp_fov_overlap(args) -> int:
    a = _load_scene(args.scene_a)
    b = _load_scene(args.scene_b)
    _print_json({"overlap": ft.fov_overlap(a, b)})
    return 0


def _cmd_kp_metrics(args) -> int:
    stats = ft.load_match_stats(args.stats)
    metrics = ft.matching_metrics(stats)
    _print_json({"pairs": len(stats), **metrics})
    return 0


def _add_channels_flag(p: argparse.ArgumentParser) -> None:
    p.add_argument("--channels", default="color8",
                   choices=["color8", "color16", "label8", "depth16"],
                   help="stored sample semantics (default: color8)")
    p.add_argument("--depth-scale", type=float, default=None,
                   help="meters per unit for depth16 (default 1/512)")


def _add_threads_flag(p: argparse.ArgumentParser) -> None:
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: TANGENT_THREADS or all cores); "
                        "results never depend on this")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tangent-images",
        description="Spherical panoramas as sets of tangent-plane images.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_ico = sub.add_parser("icosphere", help="icosphere geometry queries")
    ico_sub = p_ico.add_subparsers(dest="ico_command", required=True)
    p_info = ico_sub.add_parser("info", help="counts and metrics for one level")
    p_info.add_argument("--level", type=int, required=True)
    p_info.set_defaults(func=_cmd_icosphere_info)
    p_specs = ico_sub.add_parser("plane-specs",
                                 help="tangent plane geometry for a level pair")
    p_specs.add_argument("--base-level", type=int, required=True)
    p_specs.add_argument("--source-level", type=int, required=True)
    p_specs.set_defaults(func=_cmd_icosphere_plane_specs)

    p_tt = sub.add_parser("to-tangent", help="render a panorama to tangent images")
    p_tt.add_argument("--input", required=True, help="2:1 PNG panorama")
    p_tt.add_argument("--base-level", type=int, required=True)
    p_tt.add_argument("--out", required=True, help="output directory")
    p_tt.add_argument("--interp", choices=["bilinear", "nearest"], default=None)
    p_tt.add_argument("--exact-depth", action="store_true",
                      help="force nearest interpolation for depth16 inputs")
    _add_channels_flag(p_tt)
    _add_threads_flag(p_tt)
    p_tt.set_defaults(func=_cmd_to_tangent)

    p_ft = sub.add_parser("from-tangent", help="render tangent images to a panorama")
    p_ft.add_argument("--in", dest="in_dir", required=True,
                      help="tangent-set directory with meta.json")
    p_ft.add_argument("--height", type=int, required=True,
                      help="output panorama height (power of two)")
    p_ft.add_argument("--out", required=True, help="output PNG path")
    _add_threads_flag(p_ft)
    p_ft.set_defaults(func=_cmd_from_tangent)

    p_cn = sub.add_parser("camnorm",
                          help="normalize a perspective image to a spherical "
                               "angular resolution")
    p_cn.add_argument("--level", type=int, required=True,
                      help="target spherical input level")
    p_cn.add_argument("--fov-deg", type=float, required=True)
    p_cn.add_argument("--seed", type=int, default=None,
                      help="seed for the random crop shift (default: centered)")
    p_cn.add_argument("--intrinsics", required=True, help="intrinsics JSON")
    p_cn.add_argument("--image", required=True, help="source PNG")
    p_cn.add_argument("--out", required=True, help="output PNG")
    p_cn.add_argument("--out-meta", required=True, help="output intrinsics JSON")
    p_cn.add_argument("--interp", choices=["bilinear", "nearest"], default="bilinear")
    _add_channels_flag(p_cn)
    p_cn.set_defaults(func=_cmd_camnorm)

    p_kp = sub.add_parser("kp", help="keypoint utilities")
    kp_sub = p_kp.add_subparsers(dest="kp_command", required=True)
    p_ts = kp_sub.add_parser("to-sphere",
                             help="reproject tangent-grid keypoints to the sphere")
    p_ts.add_argument("--keypoints", required=True, help="keypoint JSONL")
    p_ts.add_argument("--tangent-meta", required=True,
                      help="meta.json of the tangent set the keypoints came from")
    p_ts.add_argument("--out", required=True, help="output JSONL")
    p_ts.set_defaults(func=_cmd_kp_to_sphere)
    p_fo = kp_sub.add_parser("fov-overlap",
                             help="symmetric FOV overlap of two posed panoramas")
    p_fo.add_argument("--scene-a", required=True, help="scene JSON")
    p_fo.add_argument("--scene-b", required=True, help="scene JSON")
    p_fo.set_defaults(func=_cmd_kp_fov_overlap)
    p_me = kp_sub.add_parser("metrics", help="aggregate PMR/MS/precision")
    p_me.add_argument("--stats", required=True,
                      help="JSON array of per-pair match statistics")
    p_me.set_defaults(func=_cmd_kp_metrics)

    return parser


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TangentImageError as err:
        sys.stderr.write(json.dumps({"code": err.code, "message": str(err)}) + "\n")
        return exit_code_for(err)


if __name__ == "__main__":
    sys.exit(main())
