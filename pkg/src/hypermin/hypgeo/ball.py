"""Poincaré ball model: distances, conformal factor, circles and horocycles.

Points are plain numpy arrays of Euclidean coordinates with norm < 1.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Points closer than this to the unit sphere are rejected.
BOUNDARY_GUARD = 1e-14


class GeometryError(ValueError):
    """Invalid geometric input (point outside the ball, bad radius, ...)."""


def as_point(p, dim: int | None = None) -> np.ndarray:
    """Validate a point of the ball model and return it as a float array."""
    x = np.asarray(p, dtype=float)
    if x.ndim != 1 or x.size < 1:
        raise GeometryError(f"expected a coordinate vector, got shape {x.shape}")
    if dim is not None and x.size != dim:
        raise GeometryError(f"dimension mismatch: expected {dim}, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise GeometryError("non-finite coordinates")
    if x @ x >= 1.0 - BOUNDARY_GUARD:
        raise GeometryError(f"point {x.tolist()} is on or outside the unit sphere")
    return x


def as_points(P, dim: int | None = None) -> np.ndarray:
    X = np.asarray(P, dtype=float)
    if X.ndim != 2:
        raise GeometryError(f"expected an (m, n) array of points, got shape {X.shape}")
    if dim is not None and X.shape[1] != dim:
        raise GeometryError(f"dimension mismatch: expected {dim}, got {X.shape[1]}")
    if not np.all(np.isfinite(X)):
        raise GeometryError("non-finite coordinates")
    if np.any(np.einsum("ij,ij->i", X, X) >= 1.0 - BOUNDARY_GUARD):
        raise GeometryError("point on or outside the unit sphere")
    return X


def hyp_distance(p, q) -> float:
    """Hyperbolic distance between two points of the ball.

    Uses d = 2 asinh(|p - q| / sqrt((1 - |p|^2)(1 - |q|^2))), which keeps full
    relative accuracy for nearby points.
    """
    p = as_point(p)
    q = as_point(q, dim=p.size)
    diff = p - q
    den = np.sqrt((1.0 - p @ p) * (1.0 - q @ q))
    return float(2.0 * np.arcsinh(np.sqrt(diff @ diff) / den))


def pairwise_distance(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Matrix of hyperbolic distances between rows of A and rows of B."""
    a2 = 1.0 - np.einsum("ij,ij->i", A, A)
    b2 = 1.0 - np.einsum("ij,ij->i", B, B)
    d2 = (
        np.einsum("ij,ij->i", A, A)[:, None]
        + np.einsum("ij,ij->i", B, B)[None, :]
        - 2.0 * A @ B.T
    )
    np.maximum(d2, 0.0, out=d2)
    return 2.0 * np.arcsinh(np.sqrt(d2 / np.outer(a2, b2)))


def distance_to(points: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Hyperbolic distances from each row of ``points`` to the point ``c``."""
    diff = points - c
    d = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    den = np.sqrt((1.0 - np.einsum("ij,ij->i", points, points)) * (1.0 - c @ c))
    return 2.0 * np.arcsinh(d / den)


def conformal_factor(p) -> float:
    """F(p) = ((1 - |p|^2) / 2)^2, so the slice metric is |dx|^2 / F."""
    p = as_point(p)
    return float(((1.0 - p @ p) / 2.0) ** 2)


def mobius_translate(c: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Isometry of the ball sending 0 to ``c`` (applied to the rows of ``x``).

    Its differential at the origin is (1 - |c|^2) times the identity, so it
    preserves directions at 0.
    """
    x = np.atleast_2d(x)
    cx = x @ c
    xx = np.einsum("ij,ij->i", x, x)
    cc = c @ c
    num = (1.0 + 2.0 * cx + xx)[:, None] * c + (1.0 - cc) * x
    return num / (1.0 + 2.0 * cx + cc * xx)[:, None]


def geodesic_point(p: np.ndarray, direction: np.ndarray, length: float) -> np.ndarray:
    """Point at hyperbolic distance ``length`` from p along the unit tangent ``direction``."""
    u = np.asarray(direction, dtype=float)
    u = u / np.linalg.norm(u)
    return mobius_translate(p, np.tanh(length / 2.0) * u)[0]


@dataclass(frozen=True)
class HCircle:
    """Hyperbolic sphere with both its hyperbolic and Euclidean descriptions."""

    hyp_center: np.ndarray
    hyp_radius: float
    euc_center: np.ndarray
    euc_radius: float

    def sample(self, m: int = 64) -> np.ndarray:
        """Points on the circle (n = 2 only)."""
        if self.euc_center.size != 2:
            raise GeometryError("sampling is only defined for circles in the disk")
        t = 2.0 * np.pi * np.arange(m) / m
        return self.euc_center + self.euc_radius * np.column_stack([np.cos(t), np.sin(t)])


def _axis(c: np.ndarray) -> np.ndarray:
    nrm = np.linalg.norm(c)
    if nrm == 0.0:
        e = np.zeros_like(c)
        e[0] = 1.0
        return e
    return c / nrm


def hyp_circle(center, radius: float) -> HCircle:
    """Hyperbolic sphere of given center and radius, with its Euclidean data.

    Along the diameter through the center the sphere meets the line at the
    signed Euclidean positions (a + s)/(1 + a s) and (a - s)/(1 - a s), where
    a = |center| and s = tanh(radius/2); the Euclidean center is their midpoint.
    """
    c = as_point(center)
    if not radius > 0.0 or not np.isfinite(radius):
        raise GeometryError(f"radius must be positive and finite, got {radius}")
    a = float(np.linalg.norm(c))
    s = np.tanh(radius / 2.0)
    e1 = (a + s) / (1.0 + a * s)
    e2 = (a - s) / (1.0 - a * s)
    axis = _axis(c)
    return HCircle(c, float(radius), 0.5 * (e1 + e2) * axis, 0.5 * (e1 - e2))


def circle_from_euclidean(euc_center, euc_radius: float) -> HCircle:
    """Inverse of :func:`hyp_circle` for a Euclidean sphere inside the ball."""
    C = np.asarray(euc_center, dtype=float)
    if not euc_radius > 0.0:
        raise GeometryError("radius must be positive")
    b = float(np.linalg.norm(C))
    e1, e2 = b + euc_radius, b - euc_radius
    if e1 >= 1.0 or e2 <= -1.0:
        raise GeometryError("Euclidean sphere is not contained in the ball")
    A1, A2 = 2.0 * np.arctanh(e1), 2.0 * np.arctanh(e2)
    mid = 0.5 * (A1 + A2)
    axis = _axis(C)
    return HCircle(np.tanh(mid / 2.0) * axis, float(0.5 * (A1 - A2)), C.copy(), float(euc_radius))


@dataclass(frozen=True)
class Horocycle:
    """Horocycle of the disk: Euclidean circle internally tangent to the unit circle."""

    asymptotic_point: np.ndarray
    euc_center: np.ndarray
    euc_radius: float

    def __post_init__(self):
        xi = np.asarray(self.asymptotic_point, dtype=float)
        if abs(np.linalg.norm(xi) - 1.0) > 1e-12:
            raise GeometryError("asymptotic point must be a unit vector")
        if not 0.0 < self.euc_radius < 1.0:
            raise GeometryError("horocycle radius must lie in (0, 1)")
        if abs(np.linalg.norm(self.euc_center) + self.euc_radius - 1.0) > 1e-12:
            raise GeometryError("circle is not tangent to the unit circle at the asymptotic point")

    def contains(self, X: np.ndarray) -> np.ndarray:
        """Signed Euclidean margin |x - center| - radius (negative inside the horoball)."""
        diff = np.atleast_2d(X) - self.euc_center
        return np.sqrt(np.einsum("ij,ij->i", diff, diff)) - self.euc_radius


def horocycle_through(p, xi) -> Horocycle:
    """The horocycle through p with asymptotic point xi (a unit vector)."""
    p = as_point(p)
    xi = np.asarray(xi, dtype=float)
    xi = xi / np.linalg.norm(xi)
    pd = p @ xi
    diff = p - xi
    rho = (diff @ diff) / (2.0 * (1.0 - pd))
    return Horocycle(xi, (1.0 - rho) * xi, float(rho))


@dataclass(frozen=True)
class GeodesicLine:
    """Geodesic of the disk.

    Stored as the Euclidean circle orthogonal to the unit circle, or, when
    ``center`` is None, as the diameter with unit ``direction``.
    """

    center: np.ndarray | None
    radius: float | None
    direction: np.ndarray | None = None

    @property
    def is_diameter(self) -> bool:
        return self.center is None


def geodesic_through(p, normal) -> tuple[GeodesicLine, "callable"]:
    """Geodesic through p with Euclidean unit normal ``normal`` at p.

    Returns the line and a side function g with g(p) = 0, g > 0 on the side
    the normal points to. g(x) = (1 - |p|^2) <x - p, n> - <p, n> |x - p|^2
    is continuous in the normal, including the diameter case <p, n> = 0.
    """
    p = as_point(p, dim=2)
    n = np.asarray(normal, dtype=float)
    n = n / np.linalg.norm(n)
    pn = p @ n
    w = 1.0 - p @ p

    def side(X):
        D = np.atleast_2d(X) - p
        return w * (D @ n) - pn * np.einsum("ij,ij->i", D, D)

    if abs(pn) < 1e-15:
        line = GeodesicLine(None, None, np.array([-n[1], n[0]]))
    else:
        lam = w / (2.0 * pn)
        line = GeodesicLine(p + lam * n, abs(lam))
    return line, side
