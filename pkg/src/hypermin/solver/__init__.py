"""Dirichlet problem for minimal graphs: meshes, solvers and verification passes."""
from .data import evaluate_boundary
from .fem import HeightField, Residual, SolveOptions, SolverError, residual_QH, solve_dirichlet_2d
from .mesh import (
    INTERIOR,
    OUTER,
    Mesh,
    MeshError,
    annulus_mesh,
    band_mesh,
    check_on_curves,
    disk_mesh,
    graded_radii,
    grid_mesh,
    inner_tag,
)
from .radial import CATENOID, SLICE, NoAdmissibleNeck, RadialProfileSolution, max_rise, solve_radial
from .verify import (
    BarrierReport,
    ComparisonReport,
    PerronLog,
    ball_cover,
    barrier_envelope,
    local_replacement,
    perron_sweep,
    verify_max_principle,
)

__all__ = [
    "CATENOID", "INTERIOR", "OUTER", "SLICE",
    "BarrierReport", "ComparisonReport", "HeightField", "Mesh", "MeshError",
    "NoAdmissibleNeck", "PerronLog", "RadialProfileSolution", "Residual",
    "SolveOptions", "SolverError",
    "annulus_mesh", "ball_cover", "band_mesh", "barrier_envelope", "check_on_curves",
    "disk_mesh", "evaluate_boundary", "graded_radii", "grid_mesh", "inner_tag",
    "local_replacement", "max_rise", "perron_sweep", "residual_QH",
    "solve_dirichlet_2d", "solve_radial", "verify_max_principle",
]
