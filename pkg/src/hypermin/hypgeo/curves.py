"""Sampled closed hypersurfaces of the slice and distances between them."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import shapely

from .ball import HCircle, GeometryError, as_points, circle_from_euclidean, distance_to, hyp_circle, pairwise_distance

MIN_SAMPLES = 16


@dataclass(frozen=True)
class SampledCurve:
    """Closed curve (n = 2) or sampled hypersurface (n >= 3) in the ball.

    For n = 2 the samples are ordered and the last one connects back to the
    first; the polygon must be simple.  For n >= 3 the samples are an
    unordered point cloud.
    """

    points: np.ndarray
    dim: int = field(default=2)

    def __post_init__(self):
        P = as_points(self.points, dim=self.dim)
        object.__setattr__(self, "points", P)
        if len(P) < MIN_SAMPLES:
            raise GeometryError(f"a sampled curve needs at least {MIN_SAMPLES} points, got {len(P)}")
        if self.dim == 2:
            step = np.linalg.norm(np.roll(P, -1, axis=0) - P, axis=1)
            if np.any(step == 0.0):
                raise GeometryError("consecutive samples coincide")
            if not shapely.LinearRing(P).is_simple:
                raise GeometryError("curve is self-intersecting")

    def __len__(self):
        return len(self.points)

    @property
    def polygon(self) -> shapely.Polygon:
        if self.dim != 2:
            raise GeometryError("polygon view is only defined for n = 2")
        return shapely.Polygon(self.points)

    def contains(self, X, tol: float = 0.0) -> np.ndarray:
        """Membership of points in the closed bounded region, up to ``tol``."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        poly = self.polygon
        inside = shapely.contains_xy(poly, X[:, 0], X[:, 1])
        if tol > 0.0:
            inside |= shapely.distance(poly.exterior, shapely.points(X)) <= tol
        return inside

    def to_json(self) -> dict:
        return {"dim": self.dim, "points": self.points.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "SampledCurve":
        if "circle" in obj:
            c = obj["circle"]
            return circle_curve(c["center"], c["radius"], c.get("samples", 256))
        if "points" not in obj:
            raise GeometryError("curve JSON needs 'points' (or a 'circle' shorthand)")
        pts = np.asarray(obj["points"], dtype=float)
        dim = int(obj.get("dim", pts.shape[1] if pts.ndim == 2 else 2))
        return cls(pts, dim)

    @classmethod
    def load(cls, path) -> "SampledCurve":
        return cls.from_json(json.loads(Path(path).read_text()))


def circle_curve(center, radius: float, m: int = 256) -> SampledCurve:
    """Samples of a hyperbolic circle (n = 2) at equally spaced Euclidean angles."""
    return SampledCurve(hyp_circle(center, radius).sample(m), 2)


def sphere_cloud(center, radius: float, m: int = 400, dim: int = 3) -> SampledCurve:
    """Pseudo-random samples (fixed seed) of a hyperbolic sphere in the n-ball."""
    S = hyp_circle(center, radius)
    rng = np.random.default_rng(0)
    U = rng.normal(size=(m, dim))
    U /= np.linalg.norm(U, axis=1)[:, None]
    return SampledCurve(S.euc_center + S.euc_radius * U, dim)


def _closest_on_segments(a0, a1, b0, b1, tol):
    """Hyperbolic distance between two chart segments by nested subdivision."""
    lo_s, hi_s, lo_t, hi_t = 0.0, 1.0, 0.0, 1.0
    best = np.inf
    k = 9
    while True:
        s = np.linspace(lo_s, hi_s, k)
        t = np.linspace(lo_t, hi_t, k)
        A = a0 + s[:, None] * (a1 - a0)
        B = b0 + t[:, None] * (b1 - b0)
        D = pairwise_distance(A, B)
        i, j = np.unravel_index(np.argmin(D), D.shape)
        new = D[i, j]
        ds, dt = (hi_s - lo_s) / (k - 1), (hi_t - lo_t) / (k - 1)
        lo_s, hi_s = max(0.0, s[i] - ds), min(1.0, s[i] + ds)
        lo_t, hi_t = max(0.0, t[j] - dt), min(1.0, t[j] + dt)
        if best - new < tol and max(ds, dt) < 1e-3:
            return min(best, new)
        best = min(best, new)
        if max(ds, dt) < 1e-15:
            return best


def set_distance(A: SampledCurve, B: SampledCurve, tol: float = 1e-8) -> float:
    """Hyperbolic distance between two sampled sets.

    Minimum over all sample pairs, then (n = 2) refined on the polyline
    segments adjacent to the minimizing pair.  Curves are read as polylines,
    so chords of a convex curve make the result slightly smaller than the
    distance between the underlying smooth curves.
    """
    if len(A) == 0 or len(B) == 0:
        raise GeometryError("empty curve")
    if A.dim != B.dim:
        raise GeometryError("curves live in different dimensions")
    P, Q = A.points, B.points
    best, bi, bj = np.inf, 0, 0
    chunk = max(1, 2_000_000 // len(Q))
    for start in range(0, len(P), chunk):
        D = pairwise_distance(P[start:start + chunk], Q)
        i, j = np.unravel_index(np.argmin(D), D.shape)
        if D[i, j] < best:
            best, bi, bj = float(D[i, j]), start + i, j
    if A.dim != 2 or best == 0.0:
        return best
    m, k = len(P), len(Q)
    for ia in ((bi - 1) % m, bi):
        for jb in ((bj - 1) % k, bj):
            d = _closest_on_segments(P[ia], P[(ia + 1) % m], Q[jb], Q[(jb + 1) % k], tol)
            best = min(best, d)
    return best


def union_distance(inners: list[SampledCurve], outer: SampledCurve, tol: float = 1e-8) -> float:
    """dist(Γ_1 ∪ ... ∪ Γ_k, Γ)."""
    return min(set_distance(c, outer, tol) for c in inners)


def fit_circle(curve: SampledCurve, tol: float = 1e-6) -> HCircle | None:
    """The hyperbolic circle through the samples of a planar curve, or None.

    Algebraic least-squares fit in the chart; accepted when every sample
    lies within ``tol`` of the fitted circle in hyperbolic distance.
    """
    if curve.dim != 2:
        raise GeometryError("circle fitting is defined for planar curves")
    P = curve.points
    A = np.column_stack([2.0 * P, np.ones(len(P))])
    b = np.einsum("ij,ij->i", P, P)
    (cx, cy, k), *_ = np.linalg.lstsq(A, b, rcond=None)
    rad2 = k + cx * cx + cy * cy
    if not rad2 > 0.0:
        return None
    try:
        circ = circle_from_euclidean((cx, cy), float(np.sqrt(rad2)))
    except GeometryError:
        return None
    err = np.abs(distance_to(P, circ.hyp_center) - circ.hyp_radius)
    return circ if float(err.max()) <= tol else None
