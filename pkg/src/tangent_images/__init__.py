"""Spherical panoramas as sets of low-distortion perspective images tangent
to a subdivided icosahedron, plus the supporting geometry, camera
normalization, and keypoint-evaluation machinery."""

from .camnorm import (
    CameraIntrinsics,
    NormalizationTarget,
    PixelMap,
    angular_resolution,
    make_target,
    normalize_camera,
    sample_shift,
)
from .errors import TangentImageError
from .estimators import CameraNormalizer, TangentImageResampler
from .features import (
    Keypoint,
    MatchStats,
    PosedSphericalImage,
    fov_overlap,
    keypoints_to_sphere,
    matching_metrics,
)
from .gnomonic import (
    SphericalCoord,
    TangentPlaneSpec,
    gnomonic_forward,
    gnomonic_inverse,
    make_plane_specs,
    plane_pixel_grid,
    tangent_dim,
)
from .icosphere import (
    Icosphere,
    build_icosphere,
    face_barycenters,
    owning_face,
    owning_faces,
    surface_area_ratio,
    vertex_resolution,
    vertex_resolution_at,
)
from .images import (
    ChannelSemantics,
    EquirectImage,
    TangentImageSet,
    load_equirect,
    load_tangent_set,
    save_equirect,
    save_tangent_set,
)
from .resample import from_tangent, to_tangent

__version__ = "0.1.0"

__all__ = [
    "CameraIntrinsics",
    "CameraNormalizer",
    "ChannelSemantics",
    "EquirectImage",
    "Icosphere",
    "Keypoint",
    "MatchStats",
    "NormalizationTarget",
    "PixelMap",
    "PosedSphericalImage",
    "SphericalCoord",
    "TangentImageError",
    "TangentImageResampler",
    "TangentImageSet",
    "TangentPlaneSpec",
    "angular_resolution",
    "build_icosphere",
    "face_barycenters",
    "fov_overlap",
    "from_tangent",
    "gnomonic_forward",
    "gnomonic_inverse",
    "keypoints_to_sphere",
    "load_equirect",
    "load_tangent_set",
    "make_plane_specs",
    "make_target",
    "matching_metrics",
    "normalize_camera",
    "owning_face",
    "owning_faces",
    "plane_pixel_grid",
    "sample_shift",
    "save_equirect",
    "save_tangent_set",
    "surface_area_ratio",
    "tangent_dim",
    "to_tangent",
    "vertex_resolution",
    "vertex_resolution_at",
]
