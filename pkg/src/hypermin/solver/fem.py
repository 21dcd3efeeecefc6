"""P1 finite elements for the minimal graph operator in the disk chart.

In the chart the operator reads Q_H u = div(grad u / tau) + (n-2) p.grad u /
(tau sqrt F) - n H / F with tau = sqrt(1 + F |grad u|^2) and
F(p) = ((1 - |p|^2)/2)^2.  For n = 2 the middle term vanishes.

The scheme is the Ritz method for the discrete area
sum_T int_T sqrt(1 + F |grad u|^2) / F, with grad u constant per triangle and
the integral taken by the vertex rule.  Vertices lie on the true boundary
curves, so the vertex rule sees the conformal factor there; a centroid rule
feels the chord sag of thin boundary triangles, which shifts the apparent
position of a vertical-tangent boundary.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .mesh import Mesh, MeshError


class SolverError(RuntimeError):
    """Non-convergence; ``history`` holds the residual log."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = history or []


@dataclass
class HeightField:
    """Vertex values of a piecewise-linear height function."""

    mesh: Mesh
    values: np.ndarray
    log: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).copy()
        if self.values.shape != (self.mesh.n_vertices,):
            raise MeshError("one value per mesh vertex is required")

    def copy(self) -> "HeightField":
        return HeightField(self.mesh, self.values.copy(), dict(self.log))

    def boundary_trace(self) -> np.ndarray:
        return self.values[self.mesh.boundary]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "y", "u"])
            for (x, y), u in zip(self.mesh.vertices, self.values):
                w.writerow([repr(float(x)), repr(float(y)), repr(float(u))])

    def sidecar(self) -> dict:
        res = residual_QH(self, 0.0, method="galerkin")
        return {"mesh": self.mesh.stats(), "residual_max": res.max_norm, "log": self.log}

    def write(self, csv_path) -> Path:
        """CSV of (x, y, u) plus a JSON sidecar next to it; returns the sidecar path."""
        csv_path = Path(csv_path)
        self.write_csv(csv_path)
        side = csv_path.with_suffix(".json")
        side.write_text(json.dumps(self.sidecar(), indent=2, sort_keys=True))
        return side


class Assembly:
    """Geometric quantities of a mesh reused by every assembly."""

    def __init__(self, mesh: Mesh, triangles: np.ndarray | None = None):
        V = mesh.vertices
        T = mesh.triangles if triangles is None else mesh.triangles[triangles]
        P = V[T]
        e1, e2 = P[:, 1] - P[:, 0], P[:, 2] - P[:, 0]
        det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
        if np.any(np.abs(det) < 1e-300):
            raise MeshError("degenerate triangle")
        self.area = 0.5 * det
        # gradients of the three barycentric basis functions, shape (M, 3, 2)
        inv = np.stack([np.stack([e2[:, 1], -e1[:, 1]], 1), np.stack([-e2[:, 0], e1[:, 0]], 1)], 1) / det[:, None, None]
        g1, g2 = inv[:, :, 0], inv[:, :, 1]
        self.grad = np.stack([-g1 - g2, g1, g2], axis=1)
        # conformal factor at the three vertices, shape (M, 3)
        self.F = (0.5 * (1.0 - np.einsum("mkd,mkd->mk", P, P))) ** 2
        self.tri = T
        self.n = len(V)
        self.mass = np.bincount(T.ravel(), weights=np.repeat(self.area / 3.0, 3), minlength=self.n)
        self.rows = np.repeat(T, 3, axis=1).ravel()
        self.cols = np.tile(T, (1, 3)).ravel()

    def gradients(self, u):
        return np.einsum("mkd,mk->md", self.grad, u[self.tri])

    def tau(self, gu):
        """tau at the vertices of each triangle, shape (M, 3)."""
        return np.sqrt(1.0 + self.F * np.einsum("md,md->m", gu, gu)[:, None])

    def coefficient(self, gu):
        """Mean of 1/tau over the vertex rule, per triangle."""
        return np.mean(1.0 / self.tau(gu), axis=1)

    def energy(self, u):
        """Discrete area; its gradient is the flux."""
        return float(np.sum(self.area * np.mean(self.tau(self.gradients(u)) / self.F, axis=1)))

    def flux(self, u):
        """r_i = sum_T area grad u . grad phi_i / tau  (the weak form of -Q_0 u)."""
        gu = self.gradients(u)
        c = self.coefficient(gu)
        loc = (self.area * c)[:, None] * np.einsum("mkd,md->mk", self.grad, gu)
        return np.bincount(self.tri.ravel(), weights=loc.ravel(), minlength=self.n)

    def flux_floor(self, u):
        """Round-off level of the lumped residual: 64 eps sum_T |contribution| / mass."""
        gu = self.gradients(u)
        loc = np.abs((self.area * self.coefficient(gu))[:, None] * np.einsum("mkd,md->mk", self.grad, gu))
        mag = np.bincount(self.tri.ravel(), weights=loc.ravel(), minlength=self.n)
        return 64.0 * np.finfo(float).eps * np.divide(mag, self.mass, out=np.zeros_like(mag), where=self.mass > 0)

    def stiffness(self, weights):
        loc = self.area[:, None, None] * weights[:, None, None] * np.einsum("mid,mjd->mij", self.grad, self.grad)
        return sp.csr_matrix((loc.ravel(), (self.rows, self.cols)), shape=(self.n, self.n))

    def jacobian(self, u):
        gu = self.gradients(u)
        t = self.tau(gu)
        a = np.einsum("mkd,md->mk", self.grad, gu)
        loc = np.einsum("mid,mjd->mij", self.grad, self.grad) * np.mean(1.0 / t, axis=1)[:, None, None]
        loc -= np.mean(self.F / t ** 3, axis=1)[:, None, None] * a[:, :, None] * a[:, None, :]
        loc *= self.area[:, None, None]
        return sp.csr_matrix((loc.ravel(), (self.rows, self.cols)), shape=(self.n, self.n))


@dataclass
class Residual:
    values: np.ndarray
    max_norm: float


def _rings(mesh: Mesh, rings: int) -> sp.csr_matrix:
    T = mesh.triangles
    n = mesh.n_vertices
    A = sp.csr_matrix((np.ones(9 * len(T)), (np.repeat(T, 3, axis=1).ravel(), np.tile(T, (1, 3)).ravel())), shape=(n, n))
    R = A
    for _ in range(rings - 1):
        R = R @ A
    return R.tocsr()


def recovered_derivatives(mesh: Mesh, u: np.ndarray, rings: int = 3):
    """Vertex gradients and Hessians (xx, xy, yy) from local cubic least-squares fits."""
    V = mesh.vertices
    R = _rings(mesh, rings)
    G = np.empty((len(V), 2))
    Hs = np.empty((len(V), 3))
    for i in range(len(V)):
        nb = R.indices[R.indptr[i]:R.indptr[i + 1]]
        d = V[nb] - V[i]
        s = np.max(np.abs(d))
        x, y = (d / s).T
        M = np.column_stack([np.ones_like(x), x, y, x * x, x * y, y * y, x ** 3, x * x * y, x * y * y, y ** 3])
        c = np.linalg.lstsq(M, u[nb] - u[i], rcond=None)[0]
        G[i] = c[1:3] / s
        Hs[i] = np.array([2.0 * c[3], c[4], 2.0 * c[5]]) / s ** 2
    return G, Hs


def residual_QH(field: HeightField, H: float = 0.0, n: int = 2, method: str = "recovered") -> Residual:
    """Vertex residual of Q_H on interior vertices (boundary entries are 0).

    ``method="recovered"`` evaluates the operator in non-divergence form,
        Q_0 u = lap u / tau - (|grad u|^2 grad F . grad u + 2 F grad u' Hess u grad u) / (2 tau^3),
    from derivatives recovered by cubic fits.  This is the measure for
    interpolated smooth fields: it converges under refinement, while the
    weak residual of an interpolant does not decay pointwise.

    ``method="galerkin"`` is the lumped weak residual of the discrete
    equations, i.e. the quantity the solver drives to zero.
    """
    if n != 2:
        raise MeshError("the chart operator is evaluated in the disk (n = 2)")
    mesh = field.mesh
    V = mesh.vertices
    w = 1.0 - np.einsum("ij,ij->i", V, V)
    F = (0.5 * w) ** 2
    if method == "galerkin":
        asm = Assembly(mesh)
        r = -asm.flux(field.values) / asm.mass
    elif method == "recovered":
        G, Hs = recovered_derivatives(mesh, field.values)
        g2 = np.einsum("ij,ij->i", G, G)
        tau = np.sqrt(1.0 + F * g2)
        gradF = -w[:, None] * V
        lap = Hs[:, 0] + Hs[:, 2]
        gHg = G[:, 0] ** 2 * Hs[:, 0] + 2.0 * G[:, 0] * G[:, 1] * Hs[:, 1] + G[:, 1] ** 2 * Hs[:, 2]
        r = lap / tau - (g2 * np.einsum("ij,ij->i", gradF, G) + 2.0 * F * gHg) / (2.0 * tau ** 3)
    else:
        raise ValueError(f"unknown residual method {method!r}")
    if H != 0.0:
        r = r - n * H / F
    r[mesh.boundary] = 0.0
    interior = mesh.interior
    return Residual(r, float(np.max(np.abs(r[interior]))) if interior.any() else 0.0)


@dataclass
class SolveOptions:
    tol: float = 1e-8
    update_tol: float = 1e-10
    picard_switch: float = 1e-2
    max_picard: int = 200
    max_newton: int = 50
    newton: bool = True
    initial: str | np.ndarray = "min"


def _dirichlet_solve(A, rhs_full, u, free, fixed):
    """Solve the free block with the fixed values moved to the right-hand side."""
    rows = A[free]
    rhs = rhs_full[free] - rows[:, fixed] @ u[fixed]
    # the matrices are symmetric; minimum degree on A^T + A keeps fill low
    return splu(rows[:, free].tocsc(), permc_spec="MMD_AT_PLUS_A").solve(rhs)


def solve_free(asm: Assembly, u: np.ndarray, free: np.ndarray, opts: SolveOptions) -> tuple[np.ndarray, list]:
    """Solve the discrete equations at the ``free`` vertices, others held at ``u``.

    Picard steps (linear problems with frozen 1/tau) until the update drops
    below ``picard_switch``, then damped Newton.  Raises SolverError if the
    update and residual tolerances are not met within the iteration caps.
    """
    u = np.array(u, dtype=float)
    fixed = ~free
    history = []
    if not free.any():
        return u, history
    zero = np.zeros_like(u)

    def res_norm(v):
        return float(np.max(np.abs(asm.flux(v)[free] / asm.mass[free])))

    def settled(v, update):
        # a residual below the round-off floor of its own vertex counts as zero
        if update >= opts.update_tol:
            return False
        r = np.abs(asm.flux(v)[free] / asm.mass[free])
        return bool(np.all(r < np.maximum(opts.tol, asm.flux_floor(v)[free])))

    step = math.inf
    for _ in range(opts.max_picard):
        K = asm.stiffness(asm.coefficient(asm.gradients(u)))
        new = _dirichlet_solve(K, zero, u, free, fixed)
        step = float(np.max(np.abs(new - u[free])))
        u[free] = new
        history.append({"stage": "picard", "update": step, "residual": res_norm(u)})
        if step < (opts.picard_switch if opts.newton else opts.update_tol):
            break
    if opts.newton and not settled(u, step):
        # the flux is the gradient of the convex discrete area, which serves as
        # the merit function when the residual alone does not decrease
        energy = asm.energy(u)
        for _ in range(opts.max_newton):
            r = asm.flux(u)
            du = _dirichlet_solve(asm.jacobian(u), -r, np.where(fixed, 0.0, u), free, fixed)
            slope = float(r[free] @ du)
            norm = float(np.linalg.norm(r[free]))
            lam = 1.0
            while True:
                trial = u.copy()
                trial[free] += lam * du
                e_trial = asm.energy(trial)
                if np.linalg.norm(asm.flux(trial)[free]) < norm or e_trial <= energy + 1e-4 * lam * slope or lam < 1e-6:
                    break
                lam *= 0.5
            step = float(np.max(np.abs(lam * du)))
            u, energy = trial, e_trial
            history.append({"stage": "newton", "update": step, "residual": res_norm(u), "damping": lam})
            if settled(u, step):
                break
    if not settled(u, step):
        raise SolverError(f"no convergence: last update {step:.3g}, residual {res_norm(u):.3g}", history)
    return u, history


def solve_dirichlet_2d(mesh: Mesh, boundary_values, options: SolveOptions | None = None) -> HeightField:
    """Solve Q_0 u = 0 with u prescribed at all boundary vertices.

    ``boundary_values`` is a per-vertex array (only boundary entries are
    read) or anything accepted by :func:`evaluate_boundary`.
    """
    from .data import evaluate_boundary

    opts = options or SolveOptions()
    g = evaluate_boundary(mesh, boundary_values)
    free, fixed = mesh.interior, mesh.boundary
    if not fixed.any():
        raise MeshError("mesh has no boundary vertices")
    u = np.empty(mesh.n_vertices)
    u[fixed] = g[fixed]
    if isinstance(opts.initial, np.ndarray):
        u[free] = np.asarray(opts.initial, dtype=float)[free]
    elif opts.initial == "max":
        u[free] = g[fixed].max()
    else:
        u[free] = g[fixed].min()
    asm = Assembly(mesh)
    u, history = solve_free(asm, u, free, opts)
    final = float(np.max(np.abs(asm.flux(u)[free] / asm.mass[free]))) if free.any() else 0.0
    return HeightField(mesh, u, {"iterations": len(history), "history": history, "residual": final})
