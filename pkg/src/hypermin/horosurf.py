"""Daniel's minimal surface of H^2 x R foliated by horocycles.

Canonical position: every horizontal horocycle has asymptotic point (0, 1)
and the surface is symmetric through the slice t = 0.  In the disk model

    Y(u, theta) = (cos theta / (1 + cos u), (cos u + sin theta) / (1 + cos u), u)

for u in (-pi/2, pi/2), theta in (pi/2, 5pi/2).  The level-u horocycle is the
Euclidean circle x^2 + (y - cos u/(1 + cos u))^2 = 1/(1 + cos u)^2.  Solving
that equation for cos u gives the height function of the upper half,

    cos u = (1 - x^2 - y^2) / (x^2 + (1 - y)^2),

defined on the band outside the u = 0 horocycle H0 (center (0, 1/2), radius 1/2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hypgeo.ball import GeometryError, Horocycle

HALF_PI = math.pi / 2.0
ASYMPTOTIC_POINT = np.array([0.0, 1.0])


def surface_point(u: float, theta: float) -> np.ndarray:
    """The point Y(u, theta) = (x, y, t) of the surface."""
    if not -HALF_PI < u < HALF_PI:
        raise GeometryError(f"u = {u} outside (-pi/2, pi/2)")
    if not HALF_PI < theta < 5.0 * HALF_PI:
        raise GeometryError(f"theta = {theta} outside (pi/2, 5pi/2)")
    c = math.cos(u)
    return np.array([math.cos(theta) / (1.0 + c), (c + math.sin(theta)) / (1.0 + c), u])


def level_horocycle(u: float) -> Horocycle:
    """Projection to the slice of the horizontal horocycle at height u."""
    c = math.cos(u)
    return Horocycle(ASYMPTOTIC_POINT, np.array([0.0, c / (1.0 + c)]), 1.0 / (1.0 + c))


def cos_level(points) -> np.ndarray:
    """cos of the level through each point: (1 - |q|^2) / (x^2 + (1 - y)^2)."""
    Q = np.atleast_2d(np.asarray(points, dtype=float))
    x, y = Q[:, 0], Q[:, 1]
    return (1.0 - x * x - y * y) / (x * x + (1.0 - y) ** 2)


def upsilon(q) -> float:
    """Height of the upper half-surface over q (q in the band outside H0)."""
    q = np.asarray(q, dtype=float)
    if q.shape != (2,) or q @ q >= 1.0:
        raise GeometryError("upsilon takes a point of the open unit disk")
    return float(upsilon_many(q[None, :])[0])


def upsilon_many(points, clip: bool = False) -> np.ndarray:
    """Vectorized height function; with ``clip`` points inside H0 map to 0.

    Evaluated as u = 2 asin(sqrt(s)) with s = (1 - cos u)/2 = (x^2 + y^2 - y)/(x^2 + (1 - y)^2),
    which keeps full accuracy near H0 where arccos(cos u) would not.
    """
    Q = np.atleast_2d(np.asarray(points, dtype=float))
    x, y = Q[:, 0], Q[:, 1]
    if np.any(x * x + y * y >= 1.0):
        raise GeometryError("point is not in the open disk")
    s = (x * x + y * y - y) / (x * x + (1.0 - y) ** 2)
    if np.any(s < -1e-12) and not clip:
        raise GeometryError("point lies inside the horocycle H0 (outside the band)")
    return 2.0 * np.arcsin(np.sqrt(np.clip(s, 0.0, 1.0)))


def horocycle_gap(h: float) -> float:
    """Hyperbolic distance ln(sec h) between H0 and the level-h horocycle."""
    if not 0.0 <= h < HALF_PI:
        raise GeometryError(f"level h = {h} outside [0, pi/2)")
    return -math.log(math.cos(h))


def gap_level(delta: float) -> float:
    """Largest level h whose horocycle gap is at most delta: arcsec(e^delta)."""
    if delta < 0.0:
        raise GeometryError("distance must be nonnegative")
    return math.acos(math.exp(-delta))


@dataclass(frozen=True)
class HoroRegion:
    """Band between H0 and the projected level-h horocycle."""

    level: float

    def __post_init__(self):
        if not 0.0 <= self.level < HALF_PI:
            raise GeometryError("level must lie in [0, pi/2)")

    @property
    def inner(self) -> Horocycle:
        return level_horocycle(0.0)

    @property
    def outer(self) -> Horocycle:
        return level_horocycle(self.level)

    def contains(self, points) -> np.ndarray:
        c = cos_level(points)
        return (c <= 1.0 + 1e-12) & (c >= math.cos(self.level) - 1e-12)

    def sample(self, n_u: int, n_theta: int, theta_margin: float = 0.6) -> np.ndarray:
        """(x, y, upsilon) samples on a (u, theta) grid of the band."""
        u = np.linspace(0.0, self.level, n_u)
        th = np.linspace(HALF_PI + theta_margin, 5.0 * HALF_PI - theta_margin, n_theta)
        U, T = np.meshgrid(u, th, indexing="ij")
        c = np.cos(U)
        X = np.cos(T) / (1.0 + c)
        Yv = (c + np.sin(T)) / (1.0 + c)
        return np.column_stack([X.ravel(), Yv.ravel(), U.ravel()])
