"""Threshold arithmetic and existence / non-existence certificates.

A certificate never claims more than the underlying criteria give: the
existence criteria are sufficient conditions, the height cap a necessary
one, and everything in between is INCONCLUSIVE.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import shapely

from .catenoid import height_cap, half_height, profile_value
from .hypgeo.ball import GeometryError
from .hypgeo.curves import SampledCurve, union_distance
from .hypgeo.predicates import (
    INFINITE,
    PredicateResult,
    _fit_sphere,
    convexity_check,
    exterior_sphere_check,
    interior_sphere_check,
)

EXISTS = "EXISTS"
NOT_EXISTS = "NOT_EXISTS"
INCONCLUSIVE = "INCONCLUSIVE"

FINITE = "FINITE"
HOROSPHERE = "HOROSPHERE"
CONVEX = "CONVEX"

NESTING_TOL = 1e-8
DELTA_RTOL = 0.01
MIN_F_SAMPLES = 3


class SpecError(ValueError):
    """Malformed domain spec or boundary data."""


@dataclass(frozen=True)
class OuterCondition:
    kind: str
    radius: float | None = None

    def __post_init__(self):
        if self.kind not in (FINITE, HOROSPHERE, CONVEX):
            raise SpecError(f"unknown outer condition {self.kind!r}")
        if self.kind == FINITE and not (self.radius is not None and 0.0 < self.radius < math.inf):
            raise SpecError("FINITE outer condition needs a positive finite radius")

    @classmethod
    def finite(cls, radius: float) -> "OuterCondition":
        return cls(FINITE, float(radius))

    def to_json(self) -> dict:
        out = {"type": self.kind}
        if self.kind == FINITE:
            out["radius"] = self.radius
        return out


def _nesting_2d(outer: SampledCurve, inners: list[SampledCurve]) -> list[str]:
    problems = []
    poly = outer.polygon
    holes = [c.polygon for c in inners]
    for i, c in enumerate(inners):
        if not np.all(outer.contains(c.points)) or not poly.contains(holes[i]):
            d = shapely.distance(poly.exterior, holes[i].exterior)
            if not (poly.contains(holes[i]) or d <= NESTING_TOL and poly.buffer(NESTING_TOL).contains(holes[i])):
                problems.append(f"inner curve {i} is not inside the outer curve")
    for i in range(len(holes)):
        for j in range(i + 1, len(holes)):
            if holes[i].intersects(holes[j]):
                problems.append(f"inner regions {i} and {j} overlap")
    return problems


def _nesting_spheres(outer: SampledCurve, inners: list[SampledCurve]) -> list[str]:
    O = _fit_sphere(outer)
    S = [_fit_sphere(c) for c in inners]
    problems = []
    for i, s in enumerate(S):
        if np.linalg.norm(s.euc_center - O.euc_center) + s.euc_radius >= O.euc_radius:
            problems.append(f"inner sphere {i} is not inside the outer sphere")
    for i in range(len(S)):
        for j in range(i + 1, len(S)):
            if np.linalg.norm(S[i].euc_center - S[j].euc_center) <= S[i].euc_radius + S[j].euc_radius:
                problems.append(f"inner spheres {i} and {j} overlap")
    return problems


@dataclass(frozen=True, eq=False)
class DomainSpec:
    """Outer boundary, inner boundaries and the declared boundary conditions."""

    n: int
    outer: SampledCurve
    inners: tuple
    inner_radius: float
    outer_condition: OuterCondition
    declared_delta: float | None = None

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise SpecError("n must be an integer >= 2")
        object.__setattr__(self, "inners", tuple(self.inners))
        if not self.inners:
            raise SpecError("at least one inner boundary is required")
        for c in (self.outer, *self.inners):
            if c.dim != self.n:
                raise SpecError(f"curve dimension {c.dim} does not match n = {self.n}")
        if not (0.0 < self.inner_radius < math.inf):
            raise SpecError("inner sphere radius must be positive and finite")
        check = _nesting_2d if self.n == 2 else _nesting_spheres
        problems = check(self.outer, list(self.inners))
        if problems:
            raise SpecError("; ".join(problems))

    @classmethod
    def from_json(cls, obj: dict) -> "DomainSpec":
        try:
            n = int(obj["n"])
            outer = SampledCurve.from_json(obj["outer"])
            inners = [SampledCurve.from_json(c) for c in obj["inners"]]
            cond = obj["conditions"]
            oc = cond["outer"]
            outer_condition = OuterCondition(oc["type"], oc.get("radius"))
            return cls(n, outer, inners, float(cond["inner_radius"]), outer_condition, obj.get("delta"))
        except (KeyError, TypeError) as exc:
            raise SpecError(f"malformed domain spec: {exc!r}") from None
        except GeometryError as exc:
            raise SpecError(str(exc)) from None

    @classmethod
    def load(cls, path) -> "DomainSpec":
        return cls.from_json(json.loads(Path(path).read_text()))

    def to_json(self) -> dict:
        out = {
            "n": self.n,
            "outer": self.outer.to_json(),
            "inners": [c.to_json() for c in self.inners],
            "conditions": {"inner_radius": self.inner_radius, "outer": self.outer_condition.to_json()},
        }
        if self.declared_delta is not None:
            out["delta"] = self.declared_delta
        return out


@dataclass(frozen=True, eq=False)
class BoundaryData:
    """Height h on every inner boundary; 0 or sampled values f on the outer one.

    ``outer_values`` holds one value per sample of ``outer`` (a repeated
    closing value equal to the first is accepted and dropped).
    """

    h: float
    outer_values: np.ndarray | None = None
    outer: SampledCurve | None = None

    def __post_init__(self):
        if not math.isfinite(self.h):
            raise SpecError("inner height must be finite")
        if self.outer_values is None:
            return
        f = np.asarray(self.outer_values, dtype=float).ravel()
        if not np.all(np.isfinite(f)):
            raise SpecError("outer values must be finite")
        if self.outer is None:
            raise SpecError("sampled outer values need the outer curve")
        m = len(self.outer)
        if len(f) == m + 1:
            if abs(f[-1] - f[0]) > 1e-12:
                raise SpecError("outer values are discontinuous across the seam")
            f = f[:-1]
        if len(f) != m:
            raise SpecError(f"expected {m} outer values (one per outer sample), got {len(f)}")
        object.__setattr__(self, "outer_values", f)

    @property
    def sampled(self) -> bool:
        return self.outer_values is not None

    def outer_at(self, points) -> np.ndarray:
        """Outer data at points on (or near) the outer curve, linear along segments."""
        X = np.atleast_2d(np.asarray(points, dtype=float))
        if not self.sampled:
            return np.zeros(len(X))
        P = self.outer.points
        Q = np.roll(P, -1, axis=0)
        fa, fb = self.outer_values, np.roll(self.outer_values, -1)
        seg = Q - P
        L2 = np.einsum("ij,ij->i", seg, seg)
        out = np.empty(len(X))
        for k, x in enumerate(X):
            t = np.clip(((x - P) * seg).sum(axis=1) / L2, 0.0, 1.0)
            D = P + t[:, None] * seg - x
            j = int(np.argmin(np.einsum("ij,ij->i", D, D)))
            out[k] = (1.0 - t[j]) * fa[j] + t[j] * fb[j]
        return out

    def values_at(self, points, tags) -> np.ndarray:
        tags = np.asarray(tags)
        out = np.full(len(tags), float(self.h))
        outer = tags == "OUTER"
        if outer.any():
            out[outer] = self.outer_at(np.asarray(points)[outer])
        return out

    @staticmethod
    def read_f(path) -> np.ndarray:
        """Outer values from a CSV: one column f, or columns (x, y, f); a header row is allowed."""
        rows = []
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                if not row:
                    continue
                try:
                    rows.append([float(v) for v in row])
                except ValueError:
                    if rows:
                        raise SpecError(f"non-numeric row in {path}: {row}") from None
        if not rows:
            raise SpecError(f"no values in {path}")
        return np.array([r[-1] for r in rows])


@dataclass
class Certificate:
    verdict: str
    thresholds: dict
    checklist: list = field(default_factory=list)
    evidence: dict | None = None

    @property
    def exit_code(self) -> int:
        return 2 if self.verdict == INCONCLUSIVE else 0

    def to_json(self) -> dict:
        out = {
            "verdict": self.verdict,
            "thresholds": self.thresholds,
            "checklist": [{"hypothesis": h, "passed": bool(p), "witness": w} for h, p, w in self.checklist],
        }
        if self.evidence is not None:
            out["evidence"] = self.evidence
        return out


def alpha1(n: int, R1: float, delta: float) -> float:
    """g_{R1}(R1 + delta): height budget allowed by the inner sphere condition."""
    if not R1 > 0.0 or not delta >= 0.0:
        raise SpecError("need R1 > 0 and delta >= 0")
    return profile_value(n, R1, R1 + delta)


def alpha2(n: int, outer_condition: OuterCondition, delta: float) -> float:
    """Height budget allowed by the outer condition (finite sphere or horocycle)."""
    if not delta >= 0.0:
        raise SpecError("delta must be nonnegative")
    if outer_condition.kind == FINITE:
        return profile_value(n, outer_condition.radius, outer_condition.radius + delta)
    if outer_condition.kind == HOROSPHERE:
        if n != 2:
            raise SpecError("the horosphere outer condition is only supported for n = 2")
        return math.acos(math.exp(-delta))
    raise SpecError("alpha2 needs a FINITE or HOROSPHERE outer condition")


def _predicate_item(name: str, res: PredicateResult):
    return (name, res.ok, res.summary(limit=5))


def _delta_items(spec: DomainSpec):
    delta = float(union_distance(list(spec.inners), spec.outer))
    items = []
    if spec.declared_delta is not None:
        d0 = float(spec.declared_delta)
        ok = abs(d0 - delta) <= DELTA_RTOL * max(abs(delta), 1e-300)
        items.append(("declared delta agrees with the computed distance (1%)", ok,
                      {"declared": d0, "computed": delta}))
    return delta, items


def _inner_items(spec: DomainSpec, R: float):
    return [
        _predicate_item(f"inner boundary {i}: interior sphere condition, radius {R!r}", interior_sphere_check(c, R))
        for i, c in enumerate(spec.inners)
    ]


def certify_theorem1(spec: DomainSpec, data: BoundaryData) -> Certificate:
    """Existence for inner height h and outer value 0 under sphere conditions.

    EXISTS iff every geometric check passes and 0 <= h <= min(alpha1, alpha2).
    """
    if data.sampled:
        raise SpecError("this certificate needs zero outer data")
    oc = spec.outer_condition
    if oc.kind == CONVEX:
        raise SpecError("this certificate needs a FINITE or HOROSPHERE outer condition")
    if oc.kind == HOROSPHERE and spec.n != 2:
        raise SpecError("the horosphere outer condition is only supported for n = 2")
    delta, checklist = _delta_items(spec)
    checklist += _inner_items(spec, spec.inner_radius)
    R2 = oc.radius if oc.kind == FINITE else INFINITE
    label = "horosphere" if oc.kind == HOROSPHERE else f"radius {R2!r}"
    checklist.append(_predicate_item(f"outer boundary: exterior sphere condition, {label}", exterior_sphere_check(spec.outer, R2)))
    a1 = alpha1(spec.n, spec.inner_radius, delta)
    a2 = alpha2(spec.n, oc, delta)
    h = float(data.h)
    bound = min(a1, a2)
    checklist.append(("0 <= h <= min(alpha1, alpha2)", 0.0 <= h <= bound, {"h": h, "bound": bound}))
    verdict = EXISTS if all(p for _, p, _ in checklist) else INCONCLUSIVE
    return Certificate(verdict, {"delta": delta, "alpha1": a1, "alpha2": a2}, checklist)


def certify_theorem2(spec: DomainSpec, data: BoundaryData) -> Certificate:
    """Existence for inner height h and sampled outer data f over a convex outer boundary.

    EXISTS iff checks pass, osc f <= alpha and max f <= h <= min f + alpha,
    with alpha = g_R(R + delta).
    """
    if not data.sampled:
        raise SpecError("this certificate needs sampled outer data f")
    if len(data.outer_values) < MIN_F_SAMPLES:
        raise SpecError(f"f needs at least {MIN_F_SAMPLES} samples")
    if spec.outer_condition.kind != CONVEX:
        raise SpecError("this certificate needs a CONVEX outer condition")
    delta, checklist = _delta_items(spec)
    checklist += _inner_items(spec, spec.inner_radius)
    checklist.append(_predicate_item("outer boundary: convex", convexity_check(spec.outer)))
    a = profile_value(spec.n, spec.inner_radius, spec.inner_radius + delta)
    f = data.outer_values
    fmax, fmin = float(f.max()), float(f.min())
    osc = fmax - fmin
    h = float(data.h)
    checklist.append(("osc f <= alpha", osc <= a, {"osc": osc, "alpha": a}))
    checklist.append(("max f <= h <= min f + alpha", fmax <= h <= fmin + a, {"h": h, "max_f": fmax, "min_f_plus_alpha": fmin + a}))
    verdict = EXISTS if all(p for _, p, _ in checklist) else INCONCLUSIVE
    return Certificate(verdict, {"delta": delta, "alpha": a}, checklist)


def evidence_grid(n: int, r_min: float = 1e-2, r_max: float = 10.0, count: int = 40) -> list[dict]:
    cap = height_cap(n)
    out = []
    for r in np.geomspace(r_min, r_max, count):
        hh = half_height(n, float(r))
        out.append({"r": float(r), "half_height": hh, "margin": cap - hh})
    return out


def certify_nonexistence(n: int, h: float) -> Certificate:
    """No compact minimal graph joins boundaries in slices at vertical distance h >= pi/(2n-2).

    Below the cap the answer is INCONCLUSIVE.  The evidence records
    half-catenoid heights on an r-grid, all below the cap.
    """
    if int(n) != n or n < 2:
        raise SpecError("n must be an integer >= 2")
    if not h > 0.0:
        raise SpecError("height must be positive")
    cap = height_cap(n)
    grid = evidence_grid(n)
    below = all(e["margin"] > 0.0 for e in grid)
    reached = h >= cap
    checklist = [
        ("h >= pi/(2n-2)", reached, {"h": h, "cap": cap}),
        ("half-catenoid heights below the cap on the r-grid", below,
         {"points": len(grid), "min_margin": min(e["margin"] for e in grid)}),
    ]
    verdict = NOT_EXISTS if reached else INCONCLUSIVE
    return Certificate(verdict, {"height_cap": cap, "h": float(h)}, checklist, {"grid": grid})
