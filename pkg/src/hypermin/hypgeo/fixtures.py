"""Reference curves used by the tests and the CLI demos."""
from __future__ import annotations

import numpy as np

from .curves import SampledCurve, circle_curve


def concentric_circles(inner_radius: float = 1.0, outer_radius: float = 3.0, m: int = 256, center=(0.0, 0.0)):
    """Inner and outer hyperbolic circles about a common center."""
    return circle_curve(center, inner_radius, m), circle_curve(center, outer_radius, m)


def bean_curve(m: int = 400, depth: float = 0.12, width: float = 0.6) -> SampledCurve:
    """Circle-like curve with a smooth concave dent; the origin lies on the dent.

    Polar graph r(θ) = 0.4 - depth·exp(-((θ + π/2)/width)^2) about (0, 0.4),
    shifted so the bottom of the dent is the origin.  It satisfies a finite
    exterior sphere condition but is not hyperbolically convex.
    """
    t = -np.pi / 2 + 2.0 * np.pi * np.arange(m) / m
    phi = np.angle(np.exp(1j * (t + np.pi / 2)))
    r = 0.4 - depth * np.exp(-((phi / width) ** 2))
    P = np.column_stack([r * np.cos(t), 0.4 + r * np.sin(t)])
    P[:, 1] -= P[0, 1]
    return SampledCurve(P, 2)


def offset_ellipse(m: int = 400, center=(0.0, 0.62), semi_axes=(0.3, 0.06)) -> SampledCurve:
    """Flat Euclidean ellipse close to the ideal boundary.

    Its side facing the origin is Euclidean-convex but hyperbolically concave,
    with geodesic curvature above -1, so it passes the horocycle test while
    failing convexity.
    """
    t = 2.0 * np.pi * np.arange(m) / m
    a, b = semi_axes
    P = np.column_stack([center[0] + a * np.cos(t), center[1] + b * np.sin(t)])
    return SampledCurve(P, 2)


def centered_ellipse(m: int = 400, semi_axes=(0.95, 0.3)) -> SampledCurve:
    """Euclidean ellipse centered at the origin."""
    t = 2.0 * np.pi * np.arange(m) / m
    a, b = semi_axes
    return SampledCurve(np.column_stack([a * np.cos(t), b * np.sin(t)]), 2)


def geodesic_curvature(P: np.ndarray) -> np.ndarray:
    """Hyperbolic geodesic curvature of a closed polygon at its samples.

    kappa_h = ((1 - |x|^2) kappa_e + 2 <x, nu>) / 2 with kappa_e the Euclidean
    curvature (three-point circumcircle, positive where convex) and nu the
    outward normal.  Used as an independent oracle for the predicates.
    """
    a, b, c = np.roll(P, 1, axis=0), P, np.roll(P, -1, axis=0)
    ab, bc, ca = b - a, c - b, a - c
    cross = ab[:, 0] * bc[:, 1] - ab[:, 1] * bc[:, 0]
    la, lb, lc = (np.linalg.norm(v, axis=1) for v in (ab, bc, ca))
    area2 = np.sum(P[:, 0] * np.roll(P[:, 1], -1) - np.roll(P[:, 0], -1) * P[:, 1])
    orient = 1.0 if area2 > 0 else -1.0
    kappa_e = orient * 2.0 * cross / (la * lb * lc)
    t = c - a
    nu = orient * np.column_stack([t[:, 1], -t[:, 0]])
    nu /= np.linalg.norm(nu, axis=1)[:, None]
    xx = np.einsum("ij,ij->i", P, P)
    return 0.5 * ((1.0 - xx) * kappa_e + 2.0 * np.einsum("ij,ij->i", P, nu))
