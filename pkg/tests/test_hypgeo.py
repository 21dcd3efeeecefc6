import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.optimize import brentq

from hypermin.hypgeo import (
    INFINITE,
    GeometryError,
    SampledCurve,
    circle_curve,
    circle_from_euclidean,
    conformal_factor,
    convexity_check,
    exterior_sphere_check,
    fit_circle,
    horocycle_through,
    hyp_circle,
    hyp_distance,
    interior_sphere_check,
    mobius_translate,
    set_distance,
    union_distance,
)
from hypermin.hypgeo.fixtures import (
    bean_curve,
    centered_ellipse,
    concentric_circles,
    geodesic_curvature,
    offset_ellipse,
)


def test_distance_basics():
    assert hyp_distance((0, 0), (0, 0)) == 0.0
    assert hyp_distance((0, 0), (math.tanh(0.5), 0)) == pytest.approx(1.0, abs=1e-14)


def test_distance_matches_metric_integral():
    # length of the segment under ds = 2|dx| / (1 - |x|^2)
    x = 0.7
    length, _ = quad(lambda t: 2.0 / (1.0 - t * t), 0.0, x, epsabs=1e-14)
    assert hyp_distance((0, 0), (x, 0)) == pytest.approx(length, abs=1e-12)


def test_distance_symmetric_random_pairs():
    rng = np.random.default_rng(1)
    for _ in range(100):
        p, q = rng.uniform(-0.6, 0.6, (2, 2))
        assert hyp_distance(p, q) == hyp_distance(q, p)


def test_points_outside_ball_rejected():
    with pytest.raises(GeometryError):
        hyp_distance((0, 0), (1.0, 0))
    with pytest.raises(GeometryError):
        hyp_distance((0, 0), (np.nan, 0))


def test_conformal_factor_values():
    assert conformal_factor((0, 0)) == 0.25
    assert conformal_factor((0.5, 0)) == 0.140625
    eps = 1e-4
    assert conformal_factor((1 - eps, 0)) == pytest.approx(((2 * eps - eps * eps) / 2) ** 2, rel=1e-9)


def test_mobius_translate_is_isometry():
    rng = np.random.default_rng(2)
    c = np.array([0.3, -0.4])
    X = rng.uniform(-0.5, 0.5, (10, 2))
    Y = mobius_translate(c, X)
    assert np.allclose(mobius_translate(c, np.zeros(2)), c)
    for i in range(5):
        assert hyp_distance(Y[i], Y[i + 5]) == pytest.approx(hyp_distance(X[i], X[i + 5]), rel=1e-12)


def test_circle_at_origin_euclidean_radius():
    for r in (0.3, 1.0, 2.5):
        # oracle: bisection for the chart point at distance r from 0
        x = brentq(lambda t: hyp_distance((0, 0), (t, 0)) - r, 0.0, 1 - 1e-12, xtol=1e-15)
        circ = hyp_circle((0, 0), r)
        assert np.allclose(circ.euc_center, 0.0)
        assert circ.euc_radius == pytest.approx(x, abs=1e-12)
    assert hyp_circle((0, 0), 2 * math.atanh(0.5)).euc_radius == pytest.approx(0.5, abs=1e-15)


def test_off_center_circle_representation():
    circ = hyp_circle((0.4, 0.2), 0.8)
    P = circ.sample(64)
    d = [hyp_distance(p, circ.hyp_center) for p in P]
    assert np.max(np.abs(np.array(d) - 0.8)) < 1e-10


def test_horocycle_tangent_to_unit_circle():
    H = horocycle_through((0.2, -0.1), (0.0, 1.0))
    assert np.linalg.norm(H.euc_center) + H.euc_radius == pytest.approx(1.0, abs=1e-12)
    assert H.contains(np.array([[0.2, -0.1]]))[0] == pytest.approx(0.0, abs=1e-14)
    with pytest.raises(GeometryError):
        type(H)(np.array([0.0, 1.0]), np.array([0.0, 0.2]), 0.5)


def test_circle_from_euclidean_round_trip():
    circ = circle_from_euclidean((0.1, -0.3), 0.25)
    back = hyp_circle(circ.hyp_center, circ.hyp_radius)
    assert np.allclose(back.euc_center, (0.1, -0.3), atol=1e-12)
    assert back.euc_radius == pytest.approx(0.25, abs=1e-12)


def test_sampled_curve_validation():
    with pytest.raises(GeometryError):
        SampledCurve(np.zeros((8, 2)))
    t = np.linspace(0, 2 * np.pi, 40, endpoint=False)
    figure_eight = 0.3 * np.column_stack([np.sin(2 * t), np.sin(t)])
    with pytest.raises(GeometryError):
        SampledCurve(figure_eight)
    P = circle_curve((0, 0), 1.0, 32).points
    with pytest.raises(GeometryError):
        SampledCurve(np.vstack([P[:1], P]))


def test_curve_json_round_trip(tmp_path):
    c = circle_curve((0.1, 0.0), 0.5, 32)
    path = tmp_path / "c.json"
    import json
    path.write_text(json.dumps(c.to_json()))
    assert np.array_equal(SampledCurve.load(path).points, c.points)
    short = SampledCurve.from_json({"circle": {"center": [0.1, 0.0], "radius": 0.5, "samples": 32}})
    assert np.array_equal(short.points, c.points)


def test_set_distance_concentric_converges_to_radius_gap():
    # polylines sit inside the circles, so the sampled distance is a lower bound
    prev = None
    for m in (64, 256, 1024):
        a, b = circle_curve((0, 0), 1.0, m), circle_curve((0, 0), 2.0, m)
        d = set_distance(a, b)
        assert d <= 1.0 + 1e-12
        if prev is not None:
            assert abs(1.0 - d) < abs(1.0 - prev)
        prev = d
    assert abs(1.0 - prev) < 5e-5


def test_set_distance_identity_and_union():
    a, b = concentric_circles(1.0, 3.0)
    assert set_distance(a, a) == 0.0
    far = circle_curve((0, 0), 0.3)
    assert union_distance([a, far], b) == pytest.approx(set_distance(a, b))


def test_fit_circle():
    circ = fit_circle(circle_curve((0.3, -0.2), 1.1))
    assert circ.hyp_radius == pytest.approx(1.1, abs=1e-9)
    assert np.allclose(circ.hyp_center, (0.3, -0.2), atol=1e-9)
    assert fit_circle(bean_curve()) is None


def test_interior_check_on_circle():
    c = circle_curve((0.2, 0.1), 0.8)
    assert interior_sphere_check(c, 0.8).ok
    assert not interior_sphere_check(c, 1.6).ok


def test_interior_check_on_oval_below_osculating_radius():
    # oracle: smallest hyperbolic osculating radius from geodesic curvature
    # kappa = coth(rho) for a circle of radius rho
    oval = centered_ellipse(m=256, semi_axes=(0.5, 0.35))
    kappa = geodesic_curvature(oval.points)
    rho_min = math.atanh(1.0 / kappa.max())
    assert interior_sphere_check(oval, 0.9 * rho_min).ok


def test_exterior_and_convexity_on_circles():
    c = circle_curve((0.0, 0.3), 0.7)
    for R in (0.2, 1.0, 5.0, INFINITE):
        assert exterior_sphere_check(c, R).ok
    assert convexity_check(c).ok


def test_bean_exterior_pass_convexity_fail():
    bean = bean_curve()
    assert exterior_sphere_check(bean, 0.3).ok
    res = convexity_check(bean)
    assert not res.ok
    # failures sit on the dent, around the bottom point (the origin)
    pts = np.array([p for _, p, _ in res.failures])
    assert np.all(np.abs(pts[:, 0]) < 0.3)


def test_offset_ellipse_horocycle_pass_convexity_fail():
    e = offset_ellipse()
    assert exterior_sphere_check(e, INFINITE).ok
    assert not convexity_check(e).ok
    # the concave side faces the origin: negative geodesic curvature there
    assert geodesic_curvature(e.points).min() < 0.0


def test_centered_ellipse_is_convex():
    # the chart ellipse centered at 0 has positive geodesic curvature everywhere
    e = centered_ellipse()
    assert geodesic_curvature(e.points).min() > 0.0
    assert convexity_check(e).ok


def test_convex_implies_horocycle_condition():
    for curve in (centered_ellipse(), *concentric_circles(1.0, 3.0), circle_curve((0.3, 0.2), 0.5)):
        if convexity_check(curve).ok:
            assert exterior_sphere_check(curve, INFINITE).ok


def test_predicate_summary_is_plain():
    res = convexity_check(bean_curve())
    s = res.summary(limit=3)
    assert s["ok"] is False and s["n_failures"] == len(res.failures)
    assert len(s["failures"]) == 3
