"""Rotational minimal graphs (n-dimensional catenoids) of H^n x R.

The half-catenoid of neck radius r is the graph of

    g_r(rho) = int_r^rho sinh^{n-1}(r) / sqrt(sinh^{2n-2}(xi) - sinh^{2n-2}(r)) dxi

over the exterior of the hyperbolic sphere of radius r.  The integrand has a
1/sqrt(xi - r) singularity at the neck; every integral here is taken in the
variable s = sqrt(xi - r), where it becomes smooth.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

from .hypgeo.ball import as_point, distance_to

PROFILE_RTOL = 1e-10
TAIL_TOL = 1e-12


class CatenoidError(ValueError):
    pass


def _check(n, r):
    if int(n) != n or n < 2:
        raise CatenoidError(f"dimension n must be an integer >= 2, got {n}")
    if not r > 0.0 or not math.isfinite(r):
        raise CatenoidError(f"neck radius must be positive and finite, got {r}")


def height_cap(n: int) -> float:
    """pi / (2(n - 1)): supremum of half-catenoid heights."""
    return math.pi / (2.0 * (n - 1))


def _log_sinh(y):
    y = np.asarray(y, dtype=float)
    return y + np.log1p(-np.exp(-2.0 * y)) - math.log(2.0)


def _log_ratio(n, r, x):
    """log(sinh(r + x) / sinh(r)) for x >= 0, accurate as x -> 0."""
    x = np.asarray(x, dtype=float)
    small = x <= 1.0
    xs = np.where(small, x, 0.0)
    near = np.log1p(2.0 * np.sinh(xs / 2.0) ** 2 + np.sinh(xs) / math.tanh(r))
    far = _log_sinh(r + np.where(small, 1.0, x)) - _log_sinh(r)
    return np.where(small, near, far)


def integrand_xi(n, r, xi):
    """Profile integrand in the original variable (finite for xi > r)."""
    a = n - 1
    lr = _log_ratio(n, r, np.asarray(xi, dtype=float) - r)
    with np.errstate(over="ignore", divide="ignore"):
        return 1.0 / np.sqrt(np.expm1(2.0 * a * lr))


def integrand_s(n, r, s):
    """Integrand after xi = r + s^2, dxi = 2 s ds; smooth on [0, inf)."""
    s = np.asarray(s, dtype=float)
    a = n - 1
    limit = 2.0 / math.sqrt(2.0 * a / math.tanh(r))
    lr = _log_ratio(n, r, s * s)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        val = 2.0 * s / np.sqrt(np.expm1(2.0 * a * lr))
    return np.where(s < 1e-150, limit, val)


def profile_value(n: int, r: float, rho: float) -> float:
    """g_r(rho) by adaptive quadrature in s = sqrt(xi - r)."""
    _check(n, r)
    if not rho >= r:
        raise CatenoidError(f"rho = {rho} is inside the neck r = {r}")
    S = math.sqrt(rho - r)
    if S == 0.0:
        return 0.0
    if S <= 1.0:
        val, _ = quad(lambda s: float(integrand_s(n, r, s)), 0.0, S,
                      epsabs=1e-15, epsrel=PROFILE_RTOL, limit=200)
        return val
    inner, _ = quad(lambda s: float(integrand_s(n, r, s)), 0.0, 1.0,
                    epsabs=1e-15, epsrel=PROFILE_RTOL, limit=200)
    outer, _ = quad(lambda x: float(integrand_xi(n, r, x)), r + 1.0, rho,
                    epsabs=1e-15, epsrel=PROFILE_RTOL, limit=400)
    return inner + outer


def _log_tail_bound(n, r, T):
    """log of a rigorous bound on int_T^inf of the integrand (T > r)."""
    a = n - 1
    lsr, lsT = float(_log_sinh(r)), float(_log_sinh(T))
    return (
        a * lsr
        - 0.5 * math.log(-math.expm1(2.0 * a * (lsr - lsT)))
        + a * math.log(2.0)
        - a * math.log1p(-math.exp(-2.0 * T))
        - a * T
        - math.log(a)
    )


def half_height(n: int, r: float) -> float:
    """h+(r) = g_r(inf), the height of the half-catenoid.

    [r, r+1] is integrated in s; the tail is added on [r+1, r+2], [r+2, r+4],
    ... until the remainder bound sinh^{n-1}(r) int_T^inf sinh^{-(n-1)} (with
    the exact integrand's correction factor) drops below 1e-12.
    """
    _check(n, r)
    total, _ = quad(lambda s: float(integrand_s(n, r, s)), 0.0, 1.0,
                    epsabs=1e-16, epsrel=1e-13, limit=200)
    lo, step = r + 1.0, 1.0
    while _log_tail_bound(n, r, lo) > math.log(TAIL_TOL):
        hi = lo + step
        piece, _ = quad(lambda x: float(integrand_xi(n, r, x)), lo, hi,
                        epsabs=1e-16, epsrel=1e-13, limit=200)
        total += piece
        lo, step = hi, 2.0 * step
    return total


# Gauss-Legendre rule used to fill the profile table panel by panel.
_GL_X, _GL_W = np.polynomial.legendre.leggauss(20)


def _gl(n, r, a, b):
    x = 0.5 * (b - a) * _GL_X + 0.5 * (a + b)
    return 0.5 * (b - a) * np.dot(_GL_W, integrand_s(n, r, x))


class CatenoidProfile:
    """Tabulated profile g_r as a cubic Hermite spline in s = sqrt(rho - r).

    Node values come from panel-wise Gauss-Legendre sums and node slopes are
    the exact integrand, so the spline is accurate to ~1e-12; panels are
    bisected until the midpoint prediction matches the quadrature.  Beyond
    the table the direct quadrature is used.
    """

    def __init__(self, n: int, r: float, span: float | None = None, tol: float = 1e-12):
        _check(n, r)
        self.n, self.r = int(n), float(r)
        a = n - 1
        span = span if span is not None else 40.0 / a
        s_max = math.sqrt(span)
        nodes = list(np.linspace(0.0, s_max, 33))
        if r < 1.0:
            nodes += list(np.geomspace(1e-3 * math.sqrt(r), 1.0, 40))
        nodes = np.unique(np.array(nodes))
        while True:
            vals = np.concatenate([[0.0], np.cumsum([_gl(n, r, x0, x1) for x0, x1 in zip(nodes[:-1], nodes[1:])])])
            spline = CubicHermiteSpline(nodes, vals, integrand_s(n, r, nodes))
            new = []
            for k, (x0, x1) in enumerate(zip(nodes[:-1], nodes[1:])):
                xm = 0.5 * (x0 + x1)
                exact = vals[k] + _gl(n, r, x0, xm)
                if abs(spline(xm) - exact) > tol:
                    new.append(xm)
            if not new:
                break
            nodes = np.sort(np.concatenate([nodes, new]))
        self.s_nodes, self.g_nodes, self._spline = nodes, vals, spline
        self.rho_max = self.r + nodes[-1] ** 2

    @property
    def table(self) -> np.ndarray:
        """(rho, g_r(rho)) pairs of the cached table."""
        return np.column_stack([self.r + self.s_nodes ** 2, self.g_nodes])

    def __call__(self, rho):
        scalar = np.ndim(rho) == 0
        rho = np.atleast_1d(np.asarray(rho, dtype=float))
        if np.any(rho < self.r):
            raise CatenoidError("profile evaluated inside the neck")
        out = np.empty_like(rho)
        inside = rho <= self.rho_max
        out[inside] = self._spline(np.sqrt(rho[inside] - self.r))
        for idx in np.flatnonzero(~inside):
            out.flat[idx] = profile_value(self.n, self.r, float(rho.flat[idx]))
        return float(out[0]) if scalar else out

    def derivative(self, rho):
        """g_r'(rho) = integrand at rho."""
        return integrand_xi(self.n, self.r, rho)

    def inverse(self, h: float) -> float:
        """The radius R_h >= r with g_r(R_h) = h."""
        if h < 0.0:
            raise CatenoidError("height must be nonnegative")
        if h == 0.0:
            return self.r
        if h >= half_height(self.n, self.r):
            raise CatenoidError(f"height {h} is not attained: half-catenoid height is {half_height(self.n, self.r)}")
        if h <= self.g_nodes[-1]:
            s = brentq(lambda t: float(self._spline(t)) - h, 0.0, self.s_nodes[-1], xtol=1e-15, rtol=1e-15)
            return self.r + s * s
        lo, hi = self.rho_max, 2.0 * self.rho_max
        while profile_value(self.n, self.r, hi) < h:
            lo, hi = hi, 2.0 * hi
        return brentq(lambda x: profile_value(self.n, self.r, x) - h, lo, hi, xtol=1e-14, rtol=1e-15)


@lru_cache(maxsize=256)
def get_profile(n: int, r: float) -> CatenoidProfile:
    return CatenoidProfile(n, r)


def invert_profile(n: int, R: float, h: float) -> float:
    """R_h with g_R(R_h) = h (requires 0 <= h < h+(R))."""
    _check(n, R)
    return get_profile(int(n), float(R)).inverse(h)


@dataclass(frozen=True)
class CatenoidGraph:
    """sign * g_{center, r}(q) + offset over {rho_center(q) >= r}."""

    n: int
    r: float
    center: np.ndarray
    sign: int = 1
    offset: float = 0.0

    def __post_init__(self):
        _check(self.n, self.r)
        object.__setattr__(self, "center", as_point(self.center))
        if self.sign not in (1, -1):
            raise CatenoidError("sign must be +1 or -1")

    @property
    def profile(self) -> CatenoidProfile:
        return get_profile(int(self.n), float(self.r))

    def radial(self, points) -> np.ndarray:
        return distance_to(np.atleast_2d(np.asarray(points, dtype=float)), self.center)

    def heights(self, points, clamp: bool = False) -> np.ndarray:
        """Heights at the rows of ``points``.

        With ``clamp`` points inside the neck sphere get the neck value
        instead of raising.
        """
        rho = self.radial(points)
        inside = rho < self.r
        if np.any(inside):
            if not clamp and np.any(rho < self.r * (1.0 - 1e-12)):
                raise CatenoidError("point strictly inside the neck sphere")
            rho = np.where(inside, self.r, rho)
        return self.sign * self.profile(rho) + self.offset


def graph_eval(g: CatenoidGraph, q) -> float:
    """Height of the catenoid graph at a single point q."""
    q = as_point(q, dim=g.center.size)
    return float(g.heights(q[None, :])[0])


def profile_intersection(n: int, r1: float, r2: float) -> tuple[float, float]:
    """Unique crossing (rho, height) of g_{r1} and g_{r2}, rho >= max(r1, r2)."""
    _check(n, r1)
    _check(n, r2)
    if r1 == r2:
        raise CatenoidError("profiles coincide")
    if r1 > r2:
        r1, r2 = r2, r1
    p1, p2 = get_profile(int(n), float(r1)), get_profile(int(n), float(r2))

    def diff(rho):
        return float(p1(rho)) - float(p2(rho))

    lo, hi = r2, 2.0 * r2 + 1.0
    while diff(hi) > 0.0:
        lo, hi = hi, 2.0 * hi
    rho = brentq(diff, lo, hi, xtol=1e-14, rtol=1e-15)
    return rho, float(p2(rho))
