"""Interior/exterior sphere conditions and hyperbolic convexity of sampled curves.

Every predicate works point by point: at each sample p it searches a family
of candidate normals at p (a uniform grid of directions plus the normal
estimated from the neighbouring samples) for a witness, then polishes the
best candidates with a bounded 1-D search.  A point with no witness is
reported as a failure.

Ball tests are made against the samples themselves: a hyperbolic ball
tangent at p lies in the closed region iff its center is inside and no
sample falls strictly inside the ball.  This avoids chord sag, which would
otherwise reject the curve's own osculating circle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .ball import (
    GeometryError,
    HCircle,
    circle_from_euclidean,
    geodesic_point,
    geodesic_through,
    hyp_circle,
    horocycle_through,
    mobius_translate,
)
from .curves import SampledCurve

INFINITE = math.inf

N_DIRECTIONS = 256
BALL_TOL = 1e-6
SIDE_TOL = 1e-9


@dataclass
class PredicateResult:
    """Outcome of a boundary predicate.

    ``witnesses[i]`` is the circle/horocycle/geodesic found at sample i, or
    None where the search failed; ``failures`` lists (index, point, best
    margin) for those samples.
    """

    ok: bool
    witnesses: list = field(default_factory=list)
    failures: list = field(default_factory=list)

    def __bool__(self):
        return self.ok

    def summary(self, limit: int = 10) -> dict:
        return {
            "ok": self.ok,
            "n_points": len(self.witnesses),
            "n_failures": len(self.failures),
            "failures": [
                {"index": i, "point": [float(v) for v in p], "margin": float(m)}
                for i, p, m in self.failures[:limit]
            ],
        }


def estimated_normals(P: np.ndarray) -> np.ndarray:
    """Outward Euclidean unit normals of a closed polygon, from neighbour chords."""
    t = np.roll(P, -1, axis=0) - np.roll(P, 1, axis=0)
    N = np.column_stack([t[:, 1], -t[:, 0]])
    N /= np.linalg.norm(N, axis=1)[:, None]
    area2 = np.sum(P[:, 0] * np.roll(P[:, 1], -1) - np.roll(P[:, 0], -1) * P[:, 1])
    return N if area2 > 0 else -N


def _angle(v):
    return math.atan2(v[1], v[0])


def _unit(phi):
    return np.array([math.cos(phi), math.sin(phi)])


def _ball_circles(p, R, phis):
    """Euclidean centers/radii of hyperbolic circles of radius R tangent at p,
    with hyperbolic center reached from p along direction phi."""
    s = math.tanh(R / 2.0)
    dirs = np.column_stack([np.cos(phis), np.sin(phis)])
    C = mobius_translate(p, s * dirs)
    a = np.linalg.norm(C, axis=1)
    e1 = (a + s) / (1.0 + a * s)
    e2 = (a - s) / (1.0 - a * s)
    with np.errstate(invalid="ignore", divide="ignore"):
        axis = np.where(a[:, None] > 0, C / a[:, None], np.array([1.0, 0.0]))
    return C, 0.5 * (e1 + e2)[:, None] * axis, 0.5 * (e1 - e2)


def _search(score, phi0, ok_level):
    """Maximize a 2π-periodic score: seed angle, its neighbourhood, then the grid."""
    best_phi, best = phi0, score(np.array([phi0]))[0]
    if best >= ok_level:
        return best_phi, best
    grid = 2.0 * np.pi * np.arange(N_DIRECTIONS) / N_DIRECTIONS
    vals = score(grid)
    width = 2.0 * np.pi / N_DIRECTIONS
    seeds = [(phi0, math.pi / 8)] + [(grid[k], width) for k in np.argsort(vals)[::-1][:3]]
    for k in np.argsort(vals)[::-1][:1]:
        if vals[k] > best:
            best_phi, best = grid[k], vals[k]
    for centre, w in seeds:
        res = minimize_scalar(
            lambda t: -score(np.array([t]))[0],
            bounds=(centre - w, centre + w),
            method="bounded",
            options={"xatol": 1e-12},
        )
        if -res.fun > best:
            best_phi, best = float(res.x), float(-res.fun)
        if best >= ok_level:
            break
    return best_phi, best


def _fit_sphere(curve: SampledCurve) -> HCircle:
    """Recognize a sampled hyperbolic sphere (the only n >= 3 shapes supported)."""
    X = curve.points
    A = np.column_stack([2.0 * X, np.ones(len(X))])
    b = np.einsum("ij,ij->i", X, X)
    sol, *_ = np.linalg.lstsq(A, b, rcond=None)
    C = sol[:-1]
    rho = math.sqrt(sol[-1] + C @ C)
    if np.max(np.abs(np.linalg.norm(X - C, axis=1) - rho)) > 1e-9:
        raise NotImplementedError("for n >= 3 only sampled hyperbolic spheres are supported")
    return circle_from_euclidean(C, rho)


def _sphere_predicate(curve, kind, R=None):
    S = _fit_sphere(curve)
    X = curve.points
    witnesses, failures = [], []
    for i, p in enumerate(X):
        inward = S.euc_center - p
        if kind == "interior":
            if R > S.hyp_radius * (1 + 1e-12):
                failures.append((i, p, S.hyp_radius - R))
                witnesses.append(None)
                continue
            witnesses.append(hyp_circle(geodesic_point(p, inward, R), R))
        elif kind == "exterior":
            witnesses.append(hyp_circle(geodesic_point(p, -inward, R), R) if np.isfinite(R) else "horosphere")
        else:
            witnesses.append("supporting hyperplane")
    return PredicateResult(not failures, witnesses, failures)


def _check_curve(curve):
    if not isinstance(curve, SampledCurve):
        raise GeometryError("expected a SampledCurve")


def interior_sphere_check(curve: SampledCurve, R: float, tol: float = BALL_TOL) -> PredicateResult:
    """Does a hyperbolic circle of radius R through each sample fit inside the curve?"""
    _check_curve(curve)
    if not R > 0.0 or not np.isfinite(R):
        raise GeometryError("interior sphere radius must be positive and finite")
    if curve.dim != 2:
        return _sphere_predicate(curve, "interior", R)
    P = curve.points
    normals = estimated_normals(P)
    witnesses, failures = [], []
    for i, p in enumerate(P):
        others = np.delete(P, i, axis=0)

        def score(phis):
            Ch, Ce, rho = _ball_circles(p, R, phis)
            diff = others[None, :, :] - Ce[:, None, :]
            margin = np.min(np.sqrt(np.einsum("kij,kij->ki", diff, diff)) - rho[:, None], axis=1)
            inside = curve.contains(Ch)
            return np.where(inside, margin, margin - 1.0)

        phi, best = _search(score, _angle(-normals[i]), -tol)
        if best >= -tol:
            Ch, _, _ = _ball_circles(p, R, np.array([phi]))
            witnesses.append(hyp_circle(Ch[0], R))
        else:
            witnesses.append(None)
            failures.append((i, p, best))
    return PredicateResult(not failures, witnesses, failures)


def exterior_sphere_check(curve: SampledCurve, R: float, tol: float = BALL_TOL) -> PredicateResult:
    """Exterior sphere condition of radius R; ``R = INFINITE`` tests horocycles.

    The mean-convex side of a circle (or horocycle) is the ball it bounds; it
    must avoid the open region enclosed by the curve.
    """
    _check_curve(curve)
    if not R > 0.0:
        raise GeometryError("exterior sphere radius must be positive")
    if curve.dim != 2:
        return _sphere_predicate(curve, "exterior", R)
    P = curve.points
    normals = estimated_normals(P)
    witnesses, failures = [], []
    for i, p in enumerate(P):
        others = np.delete(P, i, axis=0)
        if np.isfinite(R):
            def score(phis):
                Ch, Ce, rho = _ball_circles(p, R, phis)
                diff = others[None, :, :] - Ce[:, None, :]
                margin = np.min(np.sqrt(np.einsum("kij,kij->ki", diff, diff)) - rho[:, None], axis=1)
                outside = ~curve.contains(Ch)
                return np.where(outside, margin, margin - 1.0)
        else:
            def score(phis):
                xi = np.column_stack([np.cos(phis), np.sin(phis)])
                pd = xi @ p
                rho = (1.0 + p @ p - 2.0 * pd) / (2.0 * (1.0 - pd))
                Ce = (1.0 - rho)[:, None] * xi
                diff = others[None, :, :] - Ce[:, None, :]
                return np.min(np.sqrt(np.einsum("kij,kij->ki", diff, diff)) - rho[:, None], axis=1)

        if np.isfinite(R):
            seed = _angle(normals[i])
        else:
            # endpoint at infinity of the outward normal geodesic
            seed = _angle(mobius_translate(p, normals[i])[0])
        phi, best = _search(score, seed, -tol)
        if best >= -tol:
            if np.isfinite(R):
                Ch, _, _ = _ball_circles(p, R, np.array([phi]))
                witnesses.append(hyp_circle(Ch[0], R))
            else:
                witnesses.append(horocycle_through(p, _unit(phi)))
        else:
            witnesses.append(None)
            failures.append((i, p, best))
    return PredicateResult(not failures, witnesses, failures)


def convexity_check(curve: SampledCurve, tol: float = SIDE_TOL) -> PredicateResult:
    """Hyperbolic convexity: a geodesic through each sample leaves all samples on one side."""
    _check_curve(curve)
    if curve.dim != 2:
        return _sphere_predicate(curve, "convex")
    P = curve.points
    normals = estimated_normals(P)
    w = 1.0 - np.einsum("ij,ij->i", P, P)
    witnesses, failures = [], []
    for i, p in enumerate(P):
        D = P - p
        DD = np.einsum("ij,ij->i", D, D)

        # side function with normal pointing into the region, minimized over samples
        def score(phis):
            N = np.column_stack([np.cos(phis), np.sin(phis)])
            G = w[i] * (N @ D.T) - (N @ p)[:, None] * DD[None, :]
            return np.min(G, axis=1)

        phi, best = _search(score, _angle(-normals[i]), -tol)
        if best >= -tol:
            witnesses.append(geodesic_through(p, _unit(phi))[0])
        else:
            witnesses.append(None)
            failures.append((i, p, best))
    return PredicateResult(not failures, witnesses, failures)
