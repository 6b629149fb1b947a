"""Subdivided icosahedral spheres: construction, resolution and area metrics,
and face-ownership queries.

Conventions fixed here and relied on by every other module:

  - The base icosahedron has one vertex on each of the +z and -z poles, an
    upper ring of five vertices at latitude atan(1/2) starting at longitude 0,
    and a lower ring offset by 36 degrees. Face barycenters therefore never
    coincide with a pole.
  - Each subdivision is a midpoint 4-to-1 face split with every vertex
    (old and new) reprojected to the unit sphere. New vertices are appended
    in ascending (min-index, max-index) order of the edge they bisect, so two
    builds of the same level are bit-identical.
  - Faces keep a consistent outward winding across all levels.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Tuple, Union

import numpy as np

from .errors import InvalidArgumentError, ResourceLimitError

#: Default guard on the subdivision level (level 10 is ~21M faces).
MAX_LEVEL = 10

#: Angular slack used when deciding whether a direction lies on a face
#: boundary. Matches the documented tie-break contract of owning_face.
BOUNDARY_EPS = 1e-12


@dataclass(frozen=True)
class Icosphere:
    """Immutable subdivided icosahedral mesh with unit-sphere vertices.

    Attributes:
        level: Number of midpoint subdivisions applied to the base icosahedron.
        vertices: (V, 3) float64 array of unit vectors, V = 10*4**level + 2.
        faces: (F, 3) int32 array of vertex indices, F = 20*4**level,
            consistently wound outward.
    """

    level: int
    vertices: np.ndarray
    faces: np.ndarray

    # Lazy caches (per instance, populated on first use).
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_faces(self) -> int:
        return len(self.faces)

    @property
    def num_edges(self) -> int:
        # Closed triangular 2-sphere mesh: E = 3F/2.
        return 3 * len(self.faces) // 2

    def _edges(self) -> np.ndarray:
        """(E, 2) unique undirected edges as sorted index pairs, in
        ascending (min, max) lexicographic order."""
        if "edges" not in self._cache:
            f = self.faces.astype(np.int64)
            e = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])
            e.sort(axis=1)
            key = np.unique((e[:, 0] << 32) | e[:, 1])
            self._cache["edges"] = np.stack([key >> 32, key & 0xFFFFFFFF], axis=1)
        return self._cache["edges"]

    def adjacency(self) -> Tuple[np.ndarray, np.ndarray]:
        """Vertex adjacency in CSR form: (offsets, indices).

        Neighbors of vertex v are indices[offsets[v]:offsets[v + 1]],
        sorted ascending.
        """
        if "adjacency" not in self._cache:
            e = self._edges()
            directed = np.concatenate([e, e[:, ::-1]])
            order = np.lexsort((directed[:, 1], directed[:, 0]))
            directed = directed[order]
            counts = np.bincount(directed[:, 0], minlength=self.num_vertices)
            offsets = np.concatenate([[0], np.cumsum(counts)])
            self._cache["adjacency"] = (offsets, directed[:, 1].copy())
        return self._cache["adjacency"]

    def neighbors(self, v: int) -> np.ndarray:
        offsets, indices = self.adjacency()
        return indices[offsets[v]:offsets[v + 1]]

    @property
    def vertex_adjacency(self) -> list:
        """Per-vertex neighbor lists. Convenience view of adjacency()."""
        offsets, indices = self.adjacency()
        return [indices[offsets[v]:offsets[v + 1]].tolist()
                for v in range(self.num_vertices)]

    def face_barycenters(self) -> np.ndarray:
        """(F, 3) unit vectors: normalized arithmetic means of face vertices."""
        if "barycenters" not in self._cache:
            b = self.vertices[self.faces].mean(axis=1)
            b /= np.linalg.norm(b, axis=1, keepdims=True)
            b.flags.writeable = False
            self._cache["barycenters"] = b
        return self._cache["barycenters"]

    def _edge_normals(self) -> np.ndarray:
        """(F, 3, 3) inward unit normals of the three great-circle planes
        bounding each spherical triangle. A direction d lies inside face k
        iff dot(d, n) >= 0 for all three normals n of k."""
        if "edge_normals" not in self._cache:
            v = self.vertices
            f = self.faces
            tri = v[f]  # (F, 3, 3)
            n = np.cross(tri, tri[:, [1, 2, 0]])  # edge planes (01, 12, 20)
            n /= np.linalg.norm(n, axis=2, keepdims=True)
            # Orient toward the opposite vertex so "inside" is >= 0.
            opp = tri[:, [2, 0, 1]]
            n *= np.sign(np.einsum("fij,fij->fi", n, opp))[:, :, None]
            n.flags.writeable = False
            self._cache["edge_normals"] = n
        return self._cache["edge_normals"]

    def _candidate_order(self) -> np.ndarray:
        """Face indices ordered for the scalar ownership query: the query
        sorts faces by barycenter alignment at call time; this just caches
        the barycenter matrix transpose used for that scoring."""
        return self.face_barycenters()


def _base_icosahedron() -> Tuple[np.ndarray, np.ndarray]:
    ring_lat = np.arctan(0.5)
    verts = [(0.0, 0.0, 1.0)]
    for k in range(5):
        lon = 2.0 * np.pi * k / 5.0
        verts.append((np.cos(ring_lat) * np.cos(lon),
                      np.cos(ring_lat) * np.sin(lon),
                      np.sin(ring_lat)))
    for k in range(5):
        lon = 2.0 * np.pi * k / 5.0 + np.pi / 5.0
        verts.append((np.cos(ring_lat) * np.cos(lon),
                      np.cos(ring_lat) * np.sin(lon),
                      -np.sin(ring_lat)))
    verts.append((0.0, 0.0, -1.0))
    v = np.asarray(verts, dtype=np.float64)
    v /= np.linalg.norm(v, axis=1, keepdims=True)

    faces = []
    for k in range(5):
        kn = (k + 1) % 5
        faces.append((0, 1 + k, 1 + kn))
        faces.append((1 + k, 6 + k, 1 + kn))
        faces.append((6 + k, 6 + kn, 1 + kn))
        faces.append((11, 6 + kn, 6 + k))
    return v, np.asarray(faces, dtype=np.int32)


def _subdivide(vertices: np.ndarray, faces: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """One midpoint 4-to-1 split with spherical reprojection."""
    nv = len(vertices)
    nf = len(faces)
    f = faces.astype(np.int64)
    e = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])
    e.sort(axis=1)
    key = (e[:, 0] << 32) | e[:, 1]
    ukey, inv = np.unique(key, return_inverse=True)

    mids = vertices[ukey >> 32] + vertices[ukey & 0xFFFFFFFF]
    mids /= np.linalg.norm(mids, axis=1, keepdims=True)
    new_vertices = np.vstack([vertices, mids])

    m01 = (nv + inv[:nf]).astype(np.int64)
    m12 = (nv + inv[nf:2 * nf]).astype(np.int64)
    m20 = (nv + inv[2 * nf:]).astype(np.int64)
    a, b, c = f[:, 0], f[:, 1], f[:, 2]

    out = np.empty((nf, 4, 3), dtype=np.int32)
    out[:, 0] = np.stack([a, m01, m20], axis=1)
    out[:, 1] = np.stack([b, m12, m01], axis=1)
    out[:, 2] = np.stack([c, m20, m12], axis=1)
    out[:, 3] = np.stack([m01, m12, m20], axis=1)
    return new_vertices, out.reshape(-1, 3)


def build_icosphere(level: int, max_level: int = MAX_LEVEL) -> Icosphere:
    """Build the level-b subdivided icosahedral sphere.

    Args:
        level: Non-negative subdivision count b. The result has
            10*4**b + 2 vertices and 20*4**b faces.
        max_level: Resource guard; levels above it are refused.

    Raises:
        InvalidArgumentError: If level is negative or not an integer.
        ResourceLimitError: If level exceeds max_level.
    """
    if not isinstance(level, (int, np.integer)) or isinstance(level, bool):
        raise InvalidArgumentError(f"subdivision level must be an integer, got {level!r}")
    if level < 0:
        raise InvalidArgumentError(f"subdivision level must be >= 0, got {level}")
    if level > max_level:
        raise ResourceLimitError(
            f"subdivision level {level} exceeds the guard ({max_level}); "
            f"raise max_level explicitly to build larger meshes")

    vertices, faces = _base_icosahedron()
    for _ in range(level):
        vertices, faces = _subdivide(vertices, faces)
    vertices.flags.writeable = False
    faces.flags.writeable = False
    return Icosphere(level=int(level), vertices=vertices, faces=faces)


@lru_cache(maxsize=16)
def _cached_sphere(level: int) -> Icosphere:
    return build_icosphere(level)


def vertex_resolution(sphere: Icosphere) -> float:
    """Mean over all vertices of the mean angle to their adjacent vertices,
    in radians."""
    if "vertex_resolution" in sphere._cache:
        return sphere._cache["vertex_resolution"]
    e = sphere._edges()
    v = sphere.vertices
    ang = np.arccos(np.clip(np.einsum("ij,ij->i", v[e[:, 0]], v[e[:, 1]]), -1.0, 1.0))
    nv = sphere.num_vertices
    sums = (np.bincount(e[:, 0], weights=ang, minlength=nv)
            + np.bincount(e[:, 1], weights=ang, minlength=nv))
    deg = (np.bincount(e[:, 0], minlength=nv)
           + np.bincount(e[:, 1], minlength=nv))
    res = float(np.mean(sums / deg))
    sphere._cache["vertex_resolution"] = res
    return res


def vertex_resolution_at(level: int) -> float:
    """Vertex resolution by level, extended to level -1.

    Level -1 is defined as twice the level-0 resolution, mirroring the fact
    that the resolution roughly halves with each subdivision.
    """
    if not isinstance(level, (int, np.integer)) or isinstance(level, bool):
        raise InvalidArgumentError(f"level must be an integer, got {level!r}")
    if level < -1:
        raise InvalidArgumentError(f"level must be >= -1, got {level}")
    if level == -1:
        return 2.0 * vertex_resolution(_cached_sphere(0))
    return vertex_resolution(_cached_sphere(int(level)))


def surface_area_ratio(sphere: Icosphere) -> float:
    """Total flat (chord) triangle area of the mesh over the area 4*pi of
    the unit sphere through its vertices. Lies in (0, 1) and increases
    with subdivision level."""
    v = sphere.vertices
    f = sphere.faces
    a, b, c = v[f[:, 0]], v[f[:, 1]], v[f[:, 2]]
    area = 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1).sum()
    return float(area / (4.0 * np.pi))


def face_barycenters(sphere: Icosphere) -> np.ndarray:
    """Unit barycenter direction of every face, in face order."""
    return sphere.face_barycenters()


def _validate_directions(direction: np.ndarray) -> np.ndarray:
    d = np.asarray(direction, dtype=np.float64)
    norms = np.linalg.norm(d, axis=-1)
    if not np.all(np.abs(norms - 1.0) <= 1e-9):
        raise InvalidArgumentError(
            "direction must be a unit vector (|norm - 1| <= 1e-9), "
            f"worst deviation {float(np.abs(norms - 1.0).max()):.3e}")
    return d


def owning_face(sphere: Icosphere, direction) -> int:
    """Index of the spherical triangle containing a unit direction.

    On an edge or vertex (within 1e-12 of a boundary plane) the lowest
    adjacent face index wins, so the query defines a total partition of
    the sphere.
    """
    d = _validate_directions(direction)
    if d.shape != (3,):
        raise InvalidArgumentError(f"expected a single 3-vector, got shape {d.shape}")

    normals = sphere._edge_normals()
    # Candidate faces in decreasing barycenter alignment; a strictly
    # interior hit cannot be beaten, so we can return early.
    scores = sphere.face_barycenters() @ d
    order = np.argsort(-scores, kind="stable")
    best = -1
    for k in order:
        margins = normals[k] @ d
        m = margins.min()
        if m > BOUNDARY_EPS:
            return int(k)
        if m >= -BOUNDARY_EPS and (best < 0 or k < best):
            best = int(k)
    if best >= 0:
        return best
    # Numerically outside every face: closest face by worst boundary margin.
    margins = np.einsum("fij,j->fi", normals, d).min(axis=1)
    return int(np.argmax(margins))


def owning_faces(sphere: Icosphere, directions: np.ndarray,
                 chunk: int = 65536) -> np.ndarray:
    """Vectorized owning_face over an (N, 3) array of unit directions."""
    d = _validate_directions(directions)
    if d.ndim != 2 or d.shape[1] != 3:
        raise InvalidArgumentError(f"expected an (N, 3) array, got shape {d.shape}")
    normals = sphere._edge_normals()
    n0, n1, n2 = normals[:, 0], normals[:, 1], normals[:, 2]
    out = np.empty(len(d), dtype=np.int64)
    for start in range(0, len(d), chunk):
        block = d[start:start + chunk]
        margins = block @ n0.T
        np.minimum(margins, block @ n1.T, out=margins)
        np.minimum(margins, block @ n2.T, out=margins)
        inside = margins >= -BOUNDARY_EPS
        owner = np.argmax(inside, axis=1)  # first True = lowest face index
        missed = ~inside[np.arange(len(block)), owner]
        if np.any(missed):
            owner[missed] = np.argmax(margins[missed], axis=1)
        out[start:start + chunk] = owner
    return out
