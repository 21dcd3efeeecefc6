"""Rotationally symmetric solutions: slices and catenoid pieces in any dimension."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from ..catenoid import CatenoidError, profile_value

SLICE = "SLICE"
CATENOID = "CATENOID"


class NoAdmissibleNeck(ValueError):
    """The height difference exceeds every rotational graph over the annulus."""

    code = "NO_ADMISSIBLE_NECK"


@dataclass(frozen=True)
class RadialProfileSolution:
    """u(rho) = value (SLICE) or sign * g_r(rho) + offset (CATENOID)."""

    n: int
    rho_in: float
    rho_out: float
    h_in: float
    h_out: float
    kind: str
    r: float | None = None
    sign: int = 1
    offset: float = 0.0
    center: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def __call__(self, rho):
        rho = np.asarray(rho, dtype=float)
        if self.kind == SLICE:
            return np.full_like(rho, self.h_in) if rho.ndim else self.h_in
        vals = np.vectorize(lambda x: profile_value(self.n, self.r, float(x)))(rho)
        out = self.sign * vals + self.offset
        return float(out) if out.ndim == 0 else out

    def to_json(self) -> dict:
        return {
            "n": self.n, "rho_in": self.rho_in, "rho_out": self.rho_out,
            "h_in": self.h_in, "h_out": self.h_out, "kind": self.kind,
            "r": self.r, "sign": self.sign, "offset": self.offset,
        }


def _rise(n, r, rho_in, rho_out):
    return profile_value(n, r, rho_out) - profile_value(n, r, rho_in)


def max_rise(n: int, rho_in: float, rho_out: float) -> float:
    """Largest |u(rho_out) - u(rho_in)| over rotational graphs: the neck at rho_in."""
    return profile_value(n, rho_in, rho_out)


def solve_radial(n: int, rho_in: float, rho_out: float, h_in: float, h_out: float,
                 center=(0.0, 0.0)) -> RadialProfileSolution:
    """The rotational minimal graph over rho_in <= rho <= rho_out with the given heights.

    The rise g_r(rho_out) - g_r(rho_in) increases with the neck radius r on
    (0, rho_in], from 0 to g_{rho_in}(rho_out); r is found by bracketing root
    search on that interval.
    """
    if not 0.0 < rho_in < rho_out or not math.isfinite(rho_out):
        raise CatenoidError("need 0 < rho_in < rho_out < inf")
    if not (math.isfinite(h_in) and math.isfinite(h_out)):
        raise CatenoidError("boundary heights must be finite")
    c = np.asarray(center, dtype=float)
    if h_in == h_out:
        return RadialProfileSolution(int(n), rho_in, rho_out, h_in, h_out, SLICE, center=c)
    dh = abs(h_out - h_in)
    top = max_rise(n, rho_in, rho_out)
    if dh > top:
        raise NoAdmissibleNeck(
            f"NO_ADMISSIBLE_NECK: |h_out - h_in| = {dh} exceeds the supremum {top} over necks r <= rho_in"
        )
    if dh == top:
        r = rho_in
    else:
        lo = rho_in * 1e-3
        while _rise(n, lo, rho_in, rho_out) > dh:
            lo *= 1e-3
            if lo < 1e-300:
                raise NoAdmissibleNeck("NO_ADMISSIBLE_NECK: rise too small to resolve")
        r = brentq(lambda t: _rise(n, t, rho_in, rho_out) - dh, lo, rho_in, xtol=1e-15, rtol=1e-15)
    sign = 1 if h_out > h_in else -1
    offset = h_in - sign * profile_value(n, r, rho_in)
    return RadialProfileSolution(int(n), rho_in, rho_out, h_in, h_out, CATENOID, r, sign, offset, c)
