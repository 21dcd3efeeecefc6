import json
import math

import numpy as np
import pytest

from hypermin.catenoid import CatenoidError, CatenoidGraph, profile_value
from hypermin.certify import BoundaryData, DomainSpec, OuterCondition
from hypermin.hypgeo import circle_curve
from hypermin.hypgeo.fixtures import concentric_circles
from hypermin.horosurf import upsilon_many
from hypermin.solver import (
    CATENOID,
    SLICE,
    HeightField,
    Mesh,
    MeshError,
    NoAdmissibleNeck,
    SolveOptions,
    SolverError,
    annulus_mesh,
    ball_cover,
    band_mesh,
    barrier_envelope,
    check_on_curves,
    disk_mesh,
    evaluate_boundary,
    graded_radii,
    inner_tag,
    local_replacement,
    max_rise,
    perron_sweep,
    residual_QH,
    solve_dirichlet_2d,
    solve_radial,
    verify_max_principle,
)


def catenoid_data(mesh, r=1.0):
    return CatenoidGraph(2, r, np.zeros(2)).heights(mesh.vertices, clamp=True)


# -- meshes -------------------------------------------------------------------

def test_annulus_mesh_boundary_on_circles():
    mesh = annulus_mesh(1.0, 2.0, 4, 32, center=(0.2, -0.1))
    # dense samples keep the chord sag of the reference polylines below 1e-8
    inner, outer = circle_curve((0.2, -0.1), 1.0, 40000), circle_curve((0.2, -0.1), 2.0, 40000)
    assert check_on_curves(mesh, {inner_tag(0): inner, "OUTER": outer}) < 1e-8
    s = mesh.stats()
    assert s["vertices"] == 5 * 32 and s["boundary_vertices"] == 64
    assert s["max_angle_deg"] <= 100.0


def test_graded_radii():
    r = graded_radii(1.0, 2.0, 4, grading=2.0)
    assert r[0] == 1.0 and r[-1] == 2.0
    assert np.allclose(np.diff(r), [1 / 16, 3 / 16, 5 / 16, 7 / 16])


def test_mesh_validation():
    V = np.array([[0.0, 0.0], [0.5, 0.0], [0.0, 0.5]])
    with pytest.raises(MeshError):
        Mesh(V, [[0, 1, 2]], ["OUTER"] * 2)
    with pytest.raises(MeshError):
        Mesh(V, [[0, 1, 3]], ["OUTER"] * 3)
    with pytest.raises(MeshError):
        Mesh(V, [[0, 1, 2]], ["OUTER", "INNER_x", "OUTER"])
    with pytest.raises(MeshError):
        Mesh(np.array([[0.0, 0.0], [0.9999999, 0.0], [0.0, 0.5]]), [[0, 1, 2]], ["OUTER"] * 3)
    with pytest.raises(MeshError):
        Mesh(np.array([[0.0, 0.0], [0.1, 0.0], [0.2, 0.0]]), [[0, 1, 2]], ["OUTER"] * 3)
    # obtuse triangle rejected under the default bound, accepted when relaxed
    W = np.array([[0.0, 0.0], [0.4, 0.0], [0.2, 0.05]])
    with pytest.raises(MeshError):
        Mesh(W, [[0, 1, 2]], ["OUTER"] * 3)
    assert Mesh(W, [[0, 2, 1]], ["OUTER"] * 3, max_angle=180.0).triangles.tolist() == [[0, 1, 2]]
    with pytest.raises(MeshError):
        annulus_mesh(1.0, 2.0, 4, 16)


def test_mesh_json_round_trip(tmp_path):
    mesh = disk_mesh(1.0, 3, 24)
    p = tmp_path / "mesh.json"
    p.write_text(json.dumps(mesh.to_json()))
    assert Mesh.load(p).same_as(mesh)
    with pytest.raises(MeshError):
        Mesh.from_json({"vertices": []})


def test_band_mesh_in_band():
    mesh = band_mesh(1.0, 6, 8)
    u = upsilon_many(mesh.vertices)
    assert u.min() == pytest.approx(0.4) and u.max() == pytest.approx(1.0)


def test_evaluate_boundary_forms():
    mesh = annulus_mesh(1.0, 2.0, 2, 24)
    by_tag = evaluate_boundary(mesh, {"INNER_0": 1.0, "OUTER": lambda X: X[:, 0]})
    inner = mesh.tags == "INNER_0"
    assert np.all(by_tag[inner] == 1.0)
    outer = mesh.tags == "OUTER"
    assert np.array_equal(by_tag[outer], mesh.vertices[outer, 0])
    arr = evaluate_boundary(mesh, by_tag)
    assert np.array_equal(arr[mesh.boundary], by_tag[mesh.boundary])
    with pytest.raises(ValueError):
        evaluate_boundary(mesh, {"OUTER": 0.0})
    with pytest.raises(ValueError):
        evaluate_boundary(mesh, np.full(mesh.n_vertices, np.nan))


# -- residual -----------------------------------------------------------------

def test_residual_constant_field_is_zero():
    mesh = disk_mesh(1.5, 6, 32)
    flat = HeightField(mesh, np.full(mesh.n_vertices, 0.7))
    assert residual_QH(flat).max_norm == 0.0
    # the weak form sums gradient contributions, exact up to round-off
    assert residual_QH(flat, method="galerkin").max_norm < 1e-12
    with pytest.raises(ValueError):
        residual_QH(HeightField(mesh, np.zeros(mesh.n_vertices)), method="bogus")


def test_residual_catenoid_order():
    res = []
    for k in range(3):
        mesh = annulus_mesh(1.2, 2.0, 4 * 2 ** k, 32 * 2 ** k)
        res.append(residual_QH(HeightField(mesh, catenoid_data(mesh))).max_norm)
    orders = [math.log2(a / b) for a, b in zip(res, res[1:])]
    assert all(o >= 1.0 for o in orders), (res, orders)


def test_residual_detects_non_minimal_graph():
    mesh = annulus_mesh(0.5, 1.5, 8, 64)
    bowl = mesh.vertices[:, 0] ** 2 + mesh.vertices[:, 1] ** 2
    assert residual_QH(HeightField(mesh, bowl)).max_norm > 1.0


# -- direct solver ------------------------------------------------------------

def test_constant_data_gives_constant_field():
    mesh = annulus_mesh(0.5, 1.5, 4, 32)
    field = solve_dirichlet_2d(mesh, {"INNER_0": 0.3, "OUTER": 0.3})
    assert np.allclose(field.values, 0.3, atol=1e-14)


def test_solve_matches_catenoid_and_keeps_data():
    mesh = annulus_mesh(1.0, 2.0, 16, 64, grading=4.0)
    exact = catenoid_data(mesh)
    field = solve_dirichlet_2d(mesh, exact)
    assert np.array_equal(field.values[mesh.boundary], exact[mesh.boundary])
    assert np.max(np.abs(field.values - exact)) < 2e-2
    assert field.log["residual"] < 1e-8
    assert residual_QH(field, method="galerkin").max_norm < 1e-8


def test_solve_initializations_agree():
    mesh = annulus_mesh(0.6, 1.6, 6, 48)
    data = {"INNER_0": 0.4, "OUTER": lambda X: 0.1 * X[:, 0]}
    lo = solve_dirichlet_2d(mesh, data, SolveOptions(initial="min"))
    hi = solve_dirichlet_2d(mesh, data, SolveOptions(initial="max"))
    assert np.max(np.abs(lo.values - hi.values)) < 1e-8


def test_picard_only_converges():
    mesh = annulus_mesh(0.6, 1.6, 4, 32)
    field = solve_dirichlet_2d(mesh, {"INNER_0": 0.5, "OUTER": 0.0}, SolveOptions(newton=False))
    ref = solve_dirichlet_2d(mesh, {"INNER_0": 0.5, "OUTER": 0.0})
    assert np.max(np.abs(field.values - ref.values)) < 1e-8


def test_iteration_cap_reported():
    mesh = annulus_mesh(0.6, 1.6, 4, 32)
    with pytest.raises(SolverError) as info:
        solve_dirichlet_2d(mesh, {"INNER_0": 0.5, "OUTER": 0.0}, SolveOptions(newton=False, max_picard=2))
    assert len(info.value.history) >= 2


def test_field_write(tmp_path):
    mesh = annulus_mesh(0.6, 1.6, 2, 24)
    field = solve_dirichlet_2d(mesh, {"INNER_0": 0.2, "OUTER": 0.0})
    side = field.write(tmp_path / "u.csv")
    rows = (tmp_path / "u.csv").read_text().splitlines()
    assert rows[0] == "x,y,u" and len(rows) == mesh.n_vertices + 1
    assert float(rows[1].split(",")[2]) == field.values[0]
    meta = json.loads(side.read_text())
    assert meta["mesh"]["vertices"] == mesh.n_vertices


# -- radial -------------------------------------------------------------------

def test_radial_slice():
    sol = solve_radial(2, 1.0, 2.0, 0.4, 0.4)
    assert sol.kind == SLICE and sol(1.5) == 0.4


@pytest.mark.parametrize("sign", [1, -1])
def test_radial_recovers_neck(sign):
    n, r, rho_in, rho_out = 3, 0.7, 0.9, 2.0
    rise = profile_value(n, r, rho_out) - profile_value(n, r, rho_in)
    sol = solve_radial(n, rho_in, rho_out, 0.2, 0.2 + sign * rise)
    assert sol.kind == CATENOID and sol.sign == sign
    assert sol.r == pytest.approx(r, abs=1e-6)
    assert sol(rho_in) == pytest.approx(0.2, abs=1e-8)
    assert sol(rho_out) == pytest.approx(0.2 + sign * rise, abs=1e-8)


def test_radial_no_admissible_neck():
    top = max_rise(2, 1.0, 2.0)
    # the supremum is attained at r = rho_in; r-grid check of that claim
    grid = [profile_value(2, r, 2.0) - profile_value(2, r, 1.0) for r in np.linspace(0.05, 1.0, 40)]
    assert max(grid) == pytest.approx(top)
    assert solve_radial(2, 1.0, 2.0, top, 0.0).r == 1.0
    with pytest.raises(NoAdmissibleNeck) as info:
        solve_radial(2, 1.0, 2.0, 0.0, top + 1e-3)
    assert info.value.code == "NO_ADMISSIBLE_NECK"
    with pytest.raises(CatenoidError):
        solve_radial(2, 2.0, 1.0, 0.0, 0.1)


def test_radial_agrees_with_2d_solver():
    sol = solve_radial(2, 0.8, 1.8, 0.5, 0.0)
    mesh = annulus_mesh(0.8, 1.8, 16, 96, grading=1.5)
    field = solve_dirichlet_2d(mesh, {"INNER_0": 0.5, "OUTER": 0.0})
    rho = np.clip(2 * np.arctanh(np.linalg.norm(mesh.vertices, axis=1)), 0.8, 1.8)
    assert np.max(np.abs(field.values - sol(rho))) < 2e-3


# -- comparison and Perron ----------------------------------------------------

@pytest.fixture(scope="module")
def small_annulus():
    return annulus_mesh(1.0, 2.0, 6, 32)


def test_max_principle_translate(small_annulus):
    mesh = small_annulus
    data = {"INNER_0": 0.3, "OUTER": lambda X: 0.2 * X[:, 1]}
    u1 = solve_dirichlet_2d(mesh, data)
    u2 = solve_dirichlet_2d(mesh, evaluate_boundary(mesh, data) + 0.25)
    rep = verify_max_principle(u1, u2)
    assert rep.ok and rep.worst_violation == 0.0
    assert verify_max_principle(u1, u1).worst_violation == 0.0
    with pytest.raises(MeshError):
        verify_max_principle(u2, u1)


def test_local_replacement_fixed_point_and_monotone(small_annulus):
    mesh = small_annulus
    field = solve_dirichlet_2d(mesh, {"INNER_0": 0.5, "OUTER": 0.0})
    center, radius = ball_cover(mesh)[0]
    same = local_replacement(field, center, radius)
    assert np.max(np.abs(same.values - field.values)) < 1e-9
    low = field.copy()
    low.values[mesh.interior] = 0.0
    lifted = local_replacement(low, center, radius)
    assert np.all(lifted.values >= low.values - 1e-12)
    higher = low.copy()
    higher.values[mesh.interior] = 0.1
    assert np.all(local_replacement(higher, center, radius).values >= lifted.values - 1e-9)
    with pytest.raises(MeshError):
        local_replacement(field, center, 5.0)


def test_ball_cover_covers_interior(small_annulus):
    from hypermin.hypgeo.ball import distance_to

    mesh = small_annulus
    balls = ball_cover(mesh)
    inside = np.zeros(mesh.n_vertices, dtype=bool)
    for c, r in balls:
        inside |= distance_to(mesh.vertices, c) < r
        assert np.all(distance_to(mesh.vertices[mesh.boundary], c) > r)
    assert np.all(inside[mesh.interior])


def test_perron_constant_data_one_sweep():
    mesh = annulus_mesh(1.0, 2.0, 4, 24)
    u, log = perron_sweep(mesh, {"INNER_0": 0.2, "OUTER": 0.2})
    assert log.sweeps == 1 and np.allclose(u.values, 0.2)


def test_perron_matches_direct(small_annulus):
    mesh = small_annulus
    data = {"INNER_0": 0.6, "OUTER": 0.0}
    u, log = perron_sweep(mesh, data)
    ref = solve_dirichlet_2d(mesh, data)
    assert log.monotone
    assert np.max(np.abs(u.values - ref.values)) < 1e-5


# -- barriers -----------------------------------------------------------------

def test_barrier_requires_certificate():
    inner, outer = concentric_circles(1.0, 3.0)
    spec = DomainSpec(2, outer, [inner], 1.0, OuterCondition.finite(1.0))
    mesh = annulus_mesh(1.0, 3.0, 8, 32)
    data = BoundaryData(5.0)
    field = HeightField(mesh, np.zeros(mesh.n_vertices))
    with pytest.raises(MeshError):
        barrier_envelope(spec, data, field)


def test_barrier_detects_wrong_field():
    inner, outer = concentric_circles(1.0, 3.0)
    spec = DomainSpec(2, outer, [inner], 1.0, OuterCondition.finite(1.0))
    mesh = annulus_mesh(1.0, 3.0, 8, 32)
    data = BoundaryData(0.5)
    bogus = evaluate_boundary(mesh, data)
    bogus[mesh.interior] = 0.9
    rep = barrier_envelope(spec, data, HeightField(mesh, bogus), per_curve=8)
    assert not rep.ok and rep.worst_margin < -0.1


def test_rotational_fixture_gives_rotational_field():
    mesh = annulus_mesh(0.7, 1.7, 8, 48)
    field = solve_dirichlet_2d(mesh, {"INNER_0": 0.6, "OUTER": 0.1})
    radius = np.round(np.linalg.norm(mesh.vertices, axis=1), 12)
    for rho in np.unique(radius):
        ring = field.values[radius == rho]
        assert np.ptp(ring) < 1e-6
