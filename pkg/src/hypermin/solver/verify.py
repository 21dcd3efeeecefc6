"""Verification passes on solved fields: comparison, barriers and the Perron sweep."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..catenoid import CatenoidGraph
from ..hypgeo.ball import distance_to
from ..hypgeo.predicates import INFINITE, exterior_sphere_check, interior_sphere_check
from ..horosurf import upsilon_many
from .data import evaluate_boundary
from .fem import Assembly, HeightField, SolveOptions, solve_free
from .mesh import Mesh, MeshError

COMPARISON_TOL = 1e-6
TRACE_TOL = 1e-12
BARRIER_TOL = 1e-6


@dataclass
class ComparisonReport:
    ok: bool
    worst_violation: float
    worst_vertex: int

    def __bool__(self):
        return self.ok


def verify_max_principle(u1: HeightField, u2: HeightField, tol: float = COMPARISON_TOL) -> ComparisonReport:
    """Check u1 <= u2 + tol at every vertex, given ordered boundary traces."""
    if not u1.mesh.same_as(u2.mesh):
        raise MeshError("fields live on different meshes")
    bnd = u1.mesh.boundary
    if np.any(u1.values[bnd] > u2.values[bnd] + TRACE_TOL):
        raise MeshError("boundary traces are not ordered (u1 <= u2 required)")
    diff = u1.values - u2.values
    k = int(np.argmax(diff))
    worst = max(float(diff[k]), 0.0)
    return ComparisonReport(worst <= tol, worst, k)


def _point_in_mesh(mesh: Mesh, p) -> bool:
    P = mesh.vertices[mesh.triangles]
    a, b, c = P[:, 0], P[:, 1], P[:, 2]

    def cross(o, q):
        return (q[:, 0] - o[:, 0]) * (p[1] - o[:, 1]) - (q[:, 1] - o[:, 1]) * (p[0] - o[:, 0])

    eps = -1e-14
    return bool(np.any((cross(a, b) >= eps) & (cross(b, c) >= eps) & (cross(c, a) >= eps)))


def ball_vertices(mesh: Mesh, center, radius: float) -> np.ndarray:
    """Mask of vertices strictly inside the hyperbolic ball; checks admissibility.

    A ball is admissible when its center lies in the mesh and it contains no
    boundary vertex (closed ball), i.e. the ball sits inside the discrete domain.
    """
    c = np.asarray(center, dtype=float)
    d = distance_to(mesh.vertices, c)
    if np.any(d[mesh.boundary] <= radius):
        raise MeshError("ball is not contained in the domain (it reaches a boundary vertex)")
    if not _point_in_mesh(mesh, c):
        raise MeshError("ball center lies outside the mesh")
    return d < radius


class _Replacer:
    """Local Dirichlet solves on a fixed mesh, reusing the per-ball assemblies."""

    def __init__(self, mesh: Mesh, options: SolveOptions | None = None):
        self.mesh = mesh
        self.options = options or SolveOptions()
        self._cache = {}

    def __call__(self, values: np.ndarray, center, radius: float) -> np.ndarray:
        key = (tuple(np.asarray(center, dtype=float)), float(radius))
        if key not in self._cache:
            inside = ball_vertices(self.mesh, center, radius)
            touch = np.any(inside[self.mesh.triangles], axis=1)
            self._cache[key] = (inside, Assembly(self.mesh, touch))
        inside, asm = self._cache[key]
        out, _ = solve_free(asm, values, inside, self.options)
        return out


def local_replacement(field: HeightField, center, radius: float, options: SolveOptions | None = None) -> HeightField:
    """Replace the field inside the ball by the discrete minimal graph with the same trace."""
    vals = _Replacer(field.mesh, options)(field.values, center, radius)
    return HeightField(field.mesh, vals, {"replacement": {"center": list(map(float, center)), "radius": float(radius)}})


def ball_cover(mesh: Mesh, shrink: float = 0.999) -> list[tuple[np.ndarray, float]]:
    """Greedy cover of the interior vertices by admissible balls centered at vertices.

    Each candidate ball is centered at an interior vertex with radius
    ``shrink`` times its distance to the nearest boundary vertex.
    """
    V = mesh.vertices
    interior = np.flatnonzero(mesh.interior)
    bnd = V[mesh.boundary]
    if interior.size == 0:
        return []
    radii = np.array([shrink * distance_to(bnd, V[i]).min() for i in interior])
    covers = [distance_to(V[interior], V[i]) < r for i, r in zip(interior, radii)]
    covered = np.zeros(interior.size, dtype=bool)
    balls = []
    while not covered.all():
        gains = [int(np.count_nonzero(c & ~covered)) for c in covers]
        k = int(np.argmax(gains))
        balls.append((V[interior[k]].copy(), float(radii[k])))
        covered |= covers[k]
    return balls


@dataclass
class PerronLog:
    sweeps: int = 0
    changes: list = field(default_factory=list)
    monotone: bool = True
    min_increment: float = 0.0


def perron_sweep(mesh: Mesh, data, balls=None, start: np.ndarray | None = None,
                 max_sweeps: int = 500, tol: float = 1e-8,
                 options: SolveOptions | None = None) -> tuple[HeightField, PerronLog]:
    """Perron iteration by cyclic local replacement over a ball cover.

    The default start is the constant min of the boundary data inside (a
    subsolution); the iterates are recorded as nondecreasing when every
    vertex increment is >= -1e-12.  Stops when a sweep changes the field by
    less than ``tol``.
    """
    g = evaluate_boundary(mesh, data)
    bnd = mesh.boundary
    u = g.copy()
    if start is None:
        u[~bnd] = g[bnd].min()
    else:
        u[~bnd] = np.asarray(start, dtype=float)[~bnd]
    balls = ball_cover(mesh) if balls is None else balls
    replace = _Replacer(mesh, options)
    log = PerronLog()
    for sweep in range(max_sweeps):
        before = u.copy()
        for center, radius in balls:
            new = replace(u, center, radius)
            inc = float(np.min(new - u))
            log.min_increment = min(log.min_increment, inc)
            if inc < -1e-12:
                log.monotone = False
            u = new
        change = float(np.max(np.abs(u - before)))
        log.sweeps = sweep + 1
        log.changes.append(change)
        if change < tol:
            return HeightField(mesh, u, {"perron": log.__dict__}), log
    raise MeshError(f"Perron sweep did not settle in {max_sweeps} sweeps (last change {log.changes[-1]:.3g})")


# -- barriers -----------------------------------------------------------------

def _mobius_to_i(p: complex, xi: complex):
    """Disk isometry sending p to 0 and the ideal point xi to i."""
    w = (xi - p) / (1.0 - p.conjugate() * xi)
    rot = 1j / w
    return lambda z: rot * (z - p) / (1.0 - p.conjugate() * z)


@dataclass
class BarrierPoint:
    curve: str
    index: int
    point: list
    lower_margin: float
    upper_margin: float
    value_at_p: tuple

    @property
    def ok(self) -> bool:
        return min(self.lower_margin, self.upper_margin) >= -BARRIER_TOL


@dataclass
class BarrierReport:
    ok: bool
    points: list
    worst_margin: float

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "worst_margin": self.worst_margin,
            "points": [p.__dict__ for p in self.points],
        }


def _picks(m: int, k: int) -> np.ndarray:
    return np.unique(np.round(np.arange(k) * m / k).astype(int) % m)


def barrier_envelope(spec, data, field: HeightField, per_curve: int = 32, tol: float = BARRIER_TOL,
                     certificate=None) -> BarrierReport:
    """Check v_p <= u <= w_p at every vertex for barriers at sampled boundary points.

    At p on an inner curve: v_p = max(h - g_{c, R1}, 0) over the interior
    tangent ball of radius R1 (center c), and w_p = h.  At p on the outer
    curve: v_p = 0 and w_p = min(g_{d, R2}, h) over the exterior tangent ball
    (center d), or min(Upsilon o phi, h) with phi an isometry taking the
    exterior horocycle at p to the horocycle through 0 asymptotic to i.
    """
    from ..certify import EXISTS, FINITE, HOROSPHERE, certify_theorem1

    cert = certificate or certify_theorem1(spec, data)
    if cert.verdict != EXISTS:
        raise MeshError("barrier check needs a certified configuration")
    if spec.n != 2:
        raise MeshError("barriers are checked on 2-D fields")
    h = float(data.h)
    X = field.mesh.vertices
    u = field.values
    R1 = spec.inner_radius
    points = []

    for ci, curve in enumerate(spec.inners):
        res = interior_sphere_check(curve, R1)
        for i in _picks(len(curve), per_curve):
            circ = res.witnesses[i]
            if circ is None:
                raise MeshError(f"no interior tangent ball at inner point {i}")
            g = CatenoidGraph(2, R1, circ.hyp_center, sign=-1, offset=h)
            v = np.maximum(g.heights(X, clamp=True), 0.0)
            p = curve.points[i]
            vp = max(float(g.heights(p[None, :], clamp=True)[0]), 0.0)
            points.append(BarrierPoint(f"INNER_{ci}", int(i), p.tolist(), float(np.min(u - v)),
                                       float(np.min(h - u)), (vp, h)))

    oc = spec.outer_condition
    if oc.kind == FINITE:
        res = exterior_sphere_check(spec.outer, oc.radius)
    elif oc.kind == HOROSPHERE:
        res = exterior_sphere_check(spec.outer, INFINITE)
    else:
        raise MeshError("barriers need a FINITE or HOROSPHERE outer condition")
    Z = X[:, 0] + 1j * X[:, 1]
    for i in _picks(len(spec.outer), per_curve):
        wit = res.witnesses[i]
        p = spec.outer.points[i]
        if wit is None:
            raise MeshError(f"no exterior tangent ball at outer point {i}")
        if oc.kind == FINITE:
            g = CatenoidGraph(2, oc.radius, wit.hyp_center)
            w = np.minimum(g.heights(X, clamp=True), h)
            wp = min(float(g.heights(p[None, :], clamp=True)[0]), h)
        else:
            xi = complex(*wit.asymptotic_point)
            phi = _mobius_to_i(complex(*p), xi)
            W = phi(Z)
            w = np.minimum(upsilon_many(np.column_stack([W.real, W.imag]), clip=True), h)
            q = phi(complex(*p))
            wp = min(float(upsilon_many(np.array([[q.real, q.imag]]), clip=True)[0]), h)
        points.append(BarrierPoint("OUTER", int(i), p.tolist(), float(np.min(u - 0.0)),
                                   float(np.min(w - u)), (0.0, wp)))
    worst = min(min(b.lower_margin, b.upper_margin) for b in points)
    return BarrierReport(worst >= -tol, points, worst)


