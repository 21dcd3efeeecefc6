"""Triangle meshes of slice domains in the Euclidean chart of the disk."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..hypgeo.ball import GeometryError, mobius_translate

INTERIOR = "INTERIOR"
OUTER = "OUTER"
DEFAULT_MAX_ANGLE = 100.0
EDGE_GUARD = 1.0 - 1e-6


class MeshError(ValueError):
    pass


def inner_tag(i: int) -> str:
    return f"INNER_{i}"


@dataclass(frozen=True, eq=False)
class Mesh:
    """Conforming triangulation with a boundary tag per vertex.

    Triangles are stored counter-clockwise.  Construction validates the disk
    guard, triangle orientation and the maximal-angle bound (non-obtuse
    meshes give the discrete maximum principle for the linearized problems).
    """

    vertices: np.ndarray
    triangles: np.ndarray
    boundary_tags: tuple
    max_angle: float = DEFAULT_MAX_ANGLE

    def __post_init__(self):
        V = np.asarray(self.vertices, dtype=float)
        T = np.asarray(self.triangles, dtype=np.int64)
        tags = tuple(str(t) for t in self.boundary_tags)
        if V.ndim != 2 or V.shape[1] != 2:
            raise MeshError("vertices must be an (N, 2) array")
        if T.ndim != 2 or T.shape[1] != 3:
            raise MeshError("triangles must be an (M, 3) array")
        if len(tags) != len(V):
            raise MeshError("one boundary tag per vertex is required")
        if T.size and (T.min() < 0 or T.max() >= len(V)):
            raise MeshError("triangle index out of range")
        for t in set(tags):
            if t not in (INTERIOR, OUTER) and not (t.startswith("INNER_") and t[6:].isdigit()):
                raise MeshError(f"unknown boundary tag {t!r}")
        if np.any(np.linalg.norm(V, axis=1) > EDGE_GUARD):
            raise MeshError("mesh vertex too close to the ideal boundary (|x| > 1 - 1e-6)")
        area = _signed_areas(V, T)
        if np.any(area == 0.0):
            raise MeshError("degenerate triangle")
        T = np.where((area < 0)[:, None], T[:, [0, 2, 1]], T)
        V.setflags(write=False)
        T.setflags(write=False)
        object.__setattr__(self, "vertices", V)
        object.__setattr__(self, "triangles", T)
        object.__setattr__(self, "boundary_tags", tags)
        worst = float(np.max(triangle_angles(V, T))) if len(T) else 0.0
        if worst > self.max_angle + 1e-9:
            raise MeshError(f"triangle angle {worst:.3f} deg exceeds the bound {self.max_angle} deg")

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def tags(self) -> np.ndarray:
        return np.array(self.boundary_tags)

    @property
    def interior(self) -> np.ndarray:
        return self.tags == INTERIOR

    @property
    def boundary(self) -> np.ndarray:
        return ~self.interior

    def stats(self) -> dict:
        ang = triangle_angles(self.vertices, self.triangles)
        edges = np.concatenate([self.triangles[:, [0, 1]], self.triangles[:, [1, 2]], self.triangles[:, [2, 0]]])
        lengths = np.linalg.norm(self.vertices[edges[:, 0]] - self.vertices[edges[:, 1]], axis=1)
        return {
            "vertices": self.n_vertices,
            "triangles": len(self.triangles),
            "boundary_vertices": int(self.boundary.sum()),
            "max_angle_deg": float(ang.max()),
            "min_angle_deg": float(ang.min()),
            "max_edge": float(lengths.max()),
        }

    def to_json(self) -> dict:
        return {
            "vertices": self.vertices.tolist(),
            "triangles": self.triangles.tolist(),
            "boundary_tags": list(self.boundary_tags),
        }

    @classmethod
    def from_json(cls, obj: dict, max_angle: float = DEFAULT_MAX_ANGLE) -> "Mesh":
        try:
            return cls(obj["vertices"], obj["triangles"], obj["boundary_tags"], max_angle)
        except KeyError as exc:
            raise MeshError(f"mesh JSON lacks field {exc}") from None

    @classmethod
    def load(cls, path, max_angle: float = DEFAULT_MAX_ANGLE) -> "Mesh":
        return cls.from_json(json.loads(Path(path).read_text()), max_angle)

    def same_as(self, other: "Mesh") -> bool:
        return (
            self is other
            or (
                self.vertices.shape == other.vertices.shape
                and self.triangles.shape == other.triangles.shape
                and np.array_equal(self.vertices, other.vertices)
                and np.array_equal(self.triangles, other.triangles)
                and self.boundary_tags == other.boundary_tags
            )
        )


def _signed_areas(V, T):
    a, b, c = V[T[:, 0]], V[T[:, 1]], V[T[:, 2]]
    return 0.5 * ((b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0]))


def triangle_angles(V, T) -> np.ndarray:
    """Interior angles in degrees, shape (M, 3)."""
    P = V[T]
    out = np.empty(T.shape)
    for k in range(3):
        u = P[:, (k + 1) % 3] - P[:, k]
        v = P[:, (k + 2) % 3] - P[:, k]
        cosang = np.einsum("ij,ij->i", u, v) / (np.linalg.norm(u, axis=1) * np.linalg.norm(v, axis=1))
        out[:, k] = np.degrees(np.arccos(np.clip(cosang, -1.0, 1.0)))
    return out


def check_on_curves(mesh: Mesh, curves: dict, tol: float = 1e-8) -> float:
    """Largest Euclidean distance from a tagged boundary vertex to its curve.

    ``curves`` maps tags to SampledCurve objects; raises if above ``tol``.
    """
    import shapely

    worst = 0.0
    tags = mesh.tags
    for tag, curve in curves.items():
        idx = np.flatnonzero(tags == tag)
        if idx.size == 0:
            continue
        ring = shapely.LinearRing(curve.points)
        d = shapely.distance(ring, shapely.points(mesh.vertices[idx]))
        worst = max(worst, float(np.max(d)))
    if worst > tol:
        raise MeshError(f"boundary vertex off its curve by {worst:.3g}")
    return worst


def _structured(rings: np.ndarray, n_theta: int, center, first_tag: str, last_tag: str, hub: bool):
    """Mesh a stack of concentric polygons (rings of Euclidean radii at 0),
    optionally with a hub vertex, and carry it to ``center`` isometrically.

    Every quad is split along the same diagonal so the mesh, and hence any
    discrete solution with rotational data, is invariant under a one-spoke
    rotation.
    """
    t = 2.0 * np.pi * np.arange(n_theta) / n_theta
    circ = np.column_stack([np.cos(t), np.sin(t)])
    pts = [rk * circ for rk in rings]
    tags = []
    n_r = len(rings)
    for k in range(n_r):
        tag = first_tag if k == 0 else last_tag if k == n_r - 1 else INTERIOR
        tags += [tag] * n_theta
    V = np.vstack(pts)
    tris = []
    for k in range(n_r - 1):
        for j in range(n_theta):
            a = k * n_theta + j
            b = k * n_theta + (j + 1) % n_theta
            c = (k + 1) * n_theta + (j + 1) % n_theta
            d = (k + 1) * n_theta + j
            tris += [(a, b, c), (a, c, d)]
    if hub:
        V = np.vstack([V, [[0.0, 0.0]]])
        tags.append(INTERIOR)
        h = len(V) - 1
        tris += [(h, j, (j + 1) % n_theta) for j in range(n_theta)]
    c = np.asarray(center, dtype=float)
    if np.any(c != 0.0):
        V = mobius_translate(c, V)
    return V, np.array(tris), tags


def graded_radii(r_in: float, r_out: float, n_r: int, grading: float = 1.0) -> np.ndarray:
    """Hyperbolic radii r_in + (r_out - r_in) (k/n_r)^grading, k = 0..n_r."""
    s = np.linspace(0.0, 1.0, n_r + 1) ** grading
    return r_in + (r_out - r_in) * s


def annulus_mesh(r_in: float, r_out: float, n_r: int, n_theta: int, center=(0.0, 0.0),
                 grading: float = 1.0, max_angle: float = DEFAULT_MAX_ANGLE) -> Mesh:
    """Mapped mesh of the annulus between hyperbolic circles of radii r_in < r_out.

    Radial nodes may be graded towards the inner circle (``grading`` > 1),
    which resolves the square-root behaviour of a catenoid near its neck.
    """
    if not 0.0 < r_in < r_out:
        raise GeometryError("need 0 < r_in < r_out")
    if n_r < 1 or n_theta < 3:
        raise MeshError("need n_r >= 1 and n_theta >= 3")
    rings = np.tanh(graded_radii(r_in, r_out, n_r, grading) / 2.0)
    V, T, tags = _structured(rings, n_theta, center, inner_tag(0), OUTER, hub=False)
    return Mesh(V, T, tags, max_angle)


def disk_mesh(radius: float, n_r: int, n_theta: int, center=(0.0, 0.0),
              max_angle: float = DEFAULT_MAX_ANGLE) -> Mesh:
    """Polar mesh of a hyperbolic disk (hub vertex at the center)."""
    if not radius > 0.0:
        raise GeometryError("radius must be positive")
    rings = np.tanh(radius * np.arange(1, n_r + 1) / n_r / 2.0)
    V, T, tags = _structured(rings, n_theta, center, INTERIOR, OUTER, hub=True)
    if n_r == 1:
        tags = [OUTER] * n_theta + [INTERIOR]
    return Mesh(V, T, tags, max_angle)


def grid_mesh(points: np.ndarray, shape: tuple[int, int], max_angle: float = 180.0) -> Mesh:
    """Triangulate a logically rectangular grid of points (row-major, shape (a, b)).

    The outer rows and columns are tagged OUTER.  Used for images of
    parameter rectangles, where the angle bound is usually relaxed.
    """
    a, b = shape
    P = np.asarray(points, dtype=float).reshape(a * b, 2)
    tags = []
    for i in range(a):
        for j in range(b):
            tags.append(OUTER if i in (0, a - 1) or j in (0, b - 1) else INTERIOR)
    tris = []
    for i in range(a - 1):
        for j in range(b - 1):
            p, q, r, s = i * b + j, i * b + j + 1, (i + 1) * b + j + 1, (i + 1) * b + j
            if (i + j) % 2 == 0:
                tris += [(p, q, r), (p, r, s)]
            else:
                tris += [(p, q, s), (q, r, s)]
    return Mesh(P, np.array(tris), tags, max_angle)


def band_mesh(level: float, n_u: int, n_theta: int, u_min: float = 0.4, half_width: float = 0.6,
              max_angle: float = 120.0) -> Mesh:
    """Mesh of part of the horocycle band, mapped from a (u, theta) rectangle.

    Covers levels u_min <= u <= level of the horocycle surface and angles
    within ``half_width`` of 3pi/2 (the side facing the origin).  The map is
    not conformal, so the default angle bound is relaxed.
    """
    if not 0.0 <= u_min < level < np.pi / 2:
        raise GeometryError("need 0 <= u_min < level < pi/2")
    u = np.linspace(u_min, level, n_u + 1)
    th = np.linspace(1.5 * np.pi - half_width, 1.5 * np.pi + half_width, n_theta + 1)
    U, T = np.meshgrid(u, th, indexing="ij")
    c = np.cos(U)
    P = np.column_stack([(np.cos(T) / (1.0 + c)).ravel(), ((c + np.sin(T)) / (1.0 + c)).ravel()])
    return grid_mesh(P, (n_u + 1, n_theta + 1), max_angle)


__all__ = [
    "INTERIOR",
    "OUTER",
    "Mesh",
    "MeshError",
    "annulus_mesh",
    "band_mesh",
    "check_on_curves",
    "disk_mesh",
    "graded_radii",
    "grid_mesh",
    "inner_tag",
    "triangle_angles",
]

