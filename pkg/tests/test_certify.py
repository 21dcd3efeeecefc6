import json
import math

import numpy as np
import pytest

from hypermin.catenoid import profile_value
from hypermin.certify import (
    CONVEX,
    EXISTS,
    FINITE,
    HOROSPHERE,
    INCONCLUSIVE,
    NOT_EXISTS,
    BoundaryData,
    DomainSpec,
    OuterCondition,
    SpecError,
    alpha1,
    alpha2,
    certify_nonexistence,
    certify_theorem1,
    certify_theorem2,
    evidence_grid,
)
from hypermin.hypgeo import circle_curve, set_distance
from hypermin.hypgeo.fixtures import bean_curve, concentric_circles


@pytest.fixture(scope="module")
def annulus():
    inner, outer = concentric_circles(1.0, 3.0)
    return DomainSpec(2, outer, [inner], 1.0, OuterCondition.finite(1.0))


def test_alpha_values():
    assert alpha1(2, 1.0, 0.0) == 0.0
    assert alpha1(2, 1.0, 1.0) == profile_value(2, 1.0, 2.0)
    grid = [alpha1(3, 0.5, d) for d in np.linspace(0, 3, 7)]
    assert all(b > a for a, b in zip(grid, grid[1:]))
    assert alpha2(2, OuterCondition.finite(1.0), 1.0) == profile_value(2, 1.0, 2.0)
    assert alpha2(2, OuterCondition(HOROSPHERE), math.log(2.0)) == pytest.approx(math.pi / 3, abs=1e-15)
    assert alpha2(2, OuterCondition(HOROSPHERE), 0.0) == 0.0
    assert alpha2(2, OuterCondition.finite(2.0), 0.0) == 0.0
    with pytest.raises(SpecError):
        alpha2(3, OuterCondition(HOROSPHERE), 1.0)
    with pytest.raises(SpecError):
        alpha2(2, OuterCondition(CONVEX), 1.0)
    with pytest.raises(SpecError):
        alpha1(2, 1.0, -0.1)


def test_outer_condition_validation():
    with pytest.raises(SpecError):
        OuterCondition(FINITE)
    with pytest.raises(SpecError):
        OuterCondition("ROUND", 1.0)


def test_theorem1_concentric(annulus):
    cert = certify_theorem1(annulus, BoundaryData(0.0))
    assert cert.verdict == EXISTS and cert.exit_code == 0
    a = min(cert.thresholds["alpha1"], cert.thresholds["alpha2"])
    assert certify_theorem1(annulus, BoundaryData(a)).verdict == EXISTS
    bad = certify_theorem1(annulus, BoundaryData(a + 0.1))
    assert bad.verdict == INCONCLUSIVE and bad.exit_code == 2
    assert certify_theorem1(annulus, BoundaryData(-0.1)).verdict == INCONCLUSIVE


def test_theorem1_thresholds(annulus):
    cert = certify_theorem1(annulus, BoundaryData(0.0))
    delta = cert.thresholds["delta"]
    # polyline distance sits slightly below the radius gap 2
    assert 1.99 < delta <= 2.0
    assert cert.thresholds["alpha1"] == pytest.approx(profile_value(2, 1.0, 1.0 + delta), abs=1e-14)
    assert isinstance(delta, float)


def test_theorem1_inner_permutation_invariant():
    a, b = circle_curve((-0.3, 0.0), 0.3), circle_curve((0.3, 0.0), 0.3)
    outer = circle_curve((0.0, 0.0), 2.5)
    spec1 = DomainSpec(2, outer, [a, b], 0.3, OuterCondition.finite(0.5))
    spec2 = DomainSpec(2, outer, [b, a], 0.3, OuterCondition.finite(0.5))
    for h in (0.0, 0.2, 0.6):
        c1, c2 = certify_theorem1(spec1, BoundaryData(h)), certify_theorem1(spec2, BoundaryData(h))
        assert c1.verdict == c2.verdict
        assert c1.thresholds == c2.thresholds


def test_theorem1_verdict_monotone_in_h(annulus):
    a = certify_theorem1(annulus, BoundaryData(0.0)).thresholds["alpha1"]
    verdicts = [certify_theorem1(annulus, BoundaryData(h)).verdict for h in np.linspace(0, 2 * a, 9)]
    first_bad = verdicts.index(INCONCLUSIVE)
    assert all(v == EXISTS for v in verdicts[:first_bad])
    assert all(v == INCONCLUSIVE for v in verdicts[first_bad:])


def test_theorem1_failed_geometry_inconclusive():
    outer = bean_curve()
    inner = circle_curve((0.0, 0.35), 0.1)
    spec = DomainSpec(2, outer, [inner], 0.1, OuterCondition(HOROSPHERE))
    cert = certify_theorem1(spec, BoundaryData(0.0))
    assert cert.verdict == INCONCLUSIVE
    failed = [name for name, ok, _ in cert.checklist if not ok]
    assert any("exterior" in name for name in failed)


def test_horosphere_branch(annulus):
    spec = DomainSpec(2, annulus.outer, annulus.inners, 1.0, OuterCondition(HOROSPHERE))
    cert = certify_theorem1(spec, BoundaryData(0.5))
    assert cert.verdict == EXISTS
    assert cert.thresholds["alpha2"] == pytest.approx(math.acos(math.exp(-cert.thresholds["delta"])))


def test_declared_delta_crosscheck(annulus):
    good = DomainSpec(2, annulus.outer, annulus.inners, 1.0, annulus.outer_condition, declared_delta=2.0)
    assert certify_theorem1(good, BoundaryData(0.1)).verdict == EXISTS
    bad = DomainSpec(2, annulus.outer, annulus.inners, 1.0, annulus.outer_condition, declared_delta=2.5)
    cert = certify_theorem1(bad, BoundaryData(0.1))
    assert cert.verdict == INCONCLUSIVE
    assert cert.checklist[0][2] == {"declared": 2.5, "computed": cert.thresholds["delta"]}


@pytest.fixture(scope="module")
def convex_spec():
    inner, outer = concentric_circles(1.0, 3.0)
    return DomainSpec(2, outer, [inner], 1.0, OuterCondition(CONVEX))


def test_theorem2(convex_spec):
    m = len(convex_spec.outer)
    zero = BoundaryData(0.3, np.zeros(m), convex_spec.outer)
    cert = certify_theorem2(convex_spec, zero)
    a = cert.thresholds["alpha"]
    assert cert.verdict == EXISTS
    assert certify_theorem2(convex_spec, BoundaryData(a + 0.01, np.zeros(m), convex_spec.outer)).verdict == INCONCLUSIVE
    t = np.linspace(0, 2 * np.pi, m, endpoint=False)
    f = 0.25 * a * (1 + np.sin(t))
    assert f.max() - f.min() == pytest.approx(a / 2)
    assert certify_theorem2(convex_spec, BoundaryData(f.max(), f, convex_spec.outer)).verdict == EXISTS
    wild = 0.6 * a * (1 + np.sin(t))
    assert certify_theorem2(convex_spec, BoundaryData(wild.max(), wild, convex_spec.outer)).verdict == INCONCLUSIVE
    with pytest.raises(SpecError):
        certify_theorem2(convex_spec, BoundaryData(0.1))
    with pytest.raises(SpecError):
        certify_theorem1(convex_spec, BoundaryData(0.1))


def test_boundary_data_validation(convex_spec):
    outer = convex_spec.outer
    m = len(outer)
    f = np.arange(m, dtype=float)
    closed = BoundaryData(1.0, np.append(f, f[0]), outer)
    assert len(closed.outer_values) == m
    with pytest.raises(SpecError):
        BoundaryData(1.0, np.append(f, 7.0), outer)
    with pytest.raises(SpecError):
        BoundaryData(1.0, f[:5], outer)
    with pytest.raises(SpecError):
        BoundaryData(1.0, f)
    with pytest.raises(SpecError):
        BoundaryData(math.nan)
    # values at the samples themselves are reproduced
    assert np.allclose(closed.outer_at(outer.points[:10]), f[:10])


def test_read_f(tmp_path):
    p = tmp_path / "f.csv"
    p.write_text("x,y,f\n0.1,0.2,1.5\n0.2,0.1,2.5\n0.0,0.3,3.5\n")
    assert np.array_equal(BoundaryData.read_f(p), [1.5, 2.5, 3.5])
    q = tmp_path / "g.csv"
    q.write_text("1\n2\nthree\n")
    with pytest.raises(SpecError):
        BoundaryData.read_f(q)


def test_spec_json_round_trip(annulus, tmp_path):
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(annulus.to_json()))
    back = DomainSpec.load(path)
    assert back.inner_radius == 1.0 and back.outer_condition.kind == FINITE
    assert np.array_equal(back.outer.points, annulus.outer.points)
    with pytest.raises(SpecError):
        DomainSpec.from_json({"n": 2})


def test_spec_nesting_rejected():
    a = circle_curve((0.0, 0.0), 1.0)
    with pytest.raises(SpecError):
        DomainSpec(2, a, [circle_curve((0.0, 0.0), 2.0)], 1.0, OuterCondition.finite(1.0))
    outer = circle_curve((0.0, 0.0), 3.0)
    with pytest.raises(SpecError):
        DomainSpec(2, outer, [circle_curve((0.1, 0.0), 0.5), circle_curve((0.15, 0.0), 0.5)], 0.5,
                   OuterCondition.finite(1.0))


def test_nonexistence():
    cert = certify_nonexistence(2, math.pi / 2)
    assert cert.verdict == NOT_EXISTS and cert.exit_code == 0
    assert certify_nonexistence(3, math.pi / 4).verdict == NOT_EXISTS
    weak = certify_nonexistence(2, 1.0)
    assert weak.verdict == INCONCLUSIVE and weak.exit_code == 2
    grid = cert.evidence["grid"]
    assert len(grid) == 40 and all(e["margin"] > 0 for e in grid)
    with pytest.raises(SpecError):
        certify_nonexistence(1, 1.0)


def test_evidence_grid_monotone():
    hh = [e["half_height"] for e in evidence_grid(3, count=12)]
    assert all(b > a for a, b in zip(hh, hh[1:]))


def test_certificate_json_is_serializable(annulus):
    text = json.dumps(certify_theorem1(annulus, BoundaryData(0.2)).to_json())
    assert '"verdict": "EXISTS"' in text


def test_theorem1_spheres_in_three_dimensions():
    from hypermin.hypgeo import sphere_cloud

    spec = DomainSpec(3, sphere_cloud(np.zeros(3), 2.0, 200), [sphere_cloud(np.zeros(3), 0.5, 200)], 0.5,
                      OuterCondition.finite(1.0))
    cert = certify_theorem1(spec, BoundaryData(0.0))
    assert cert.verdict == EXISTS
    assert cert.thresholds["delta"] == pytest.approx(1.5, abs=1e-9)
    assert cert.thresholds["alpha1"] == pytest.approx(profile_value(3, 0.5, 2.0), abs=1e-12)
    horo = DomainSpec(3, spec.outer, spec.inners, 0.5, OuterCondition(HOROSPHERE))
    with pytest.raises(SpecError):
        certify_theorem1(horo, BoundaryData(0.0))
