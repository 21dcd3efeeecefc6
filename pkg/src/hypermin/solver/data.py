"""Boundary data on mesh vertices."""
from __future__ import annotations

import numpy as np

from .mesh import Mesh, MeshError


def evaluate_boundary(mesh: Mesh, data) -> np.ndarray:
    """Per-vertex array with the boundary values filled in (interior entries 0).

    ``data`` may be
      * a length-N array of vertex values,
      * a dict mapping tags (``"OUTER"``, ``"INNER_0"``, ...) to constants or
        callables of an (m, 2) point array,
      * a callable of the whole (N, 2) vertex array,
      * an object with ``values_at(points, tags)`` (see certify.BoundaryData).
    """
    V = mesh.vertices
    tags = mesh.tags
    out = np.zeros(len(V))
    bnd = mesh.boundary
    if hasattr(data, "values_at"):
        out[bnd] = data.values_at(V[bnd], tags[bnd])
    elif isinstance(data, dict):
        for tag in np.unique(tags[bnd]):
            if tag not in data:
                raise MeshError(f"no boundary data for tag {tag}")
            idx = tags == tag
            val = data[tag]
            out[idx] = val(V[idx]) if callable(val) else float(val)
    elif callable(data):
        out[bnd] = np.asarray(data(V), dtype=float)[bnd]
    else:
        arr = np.asarray(data, dtype=float)
        if arr.shape != (len(V),):
            raise MeshError("vertex data must have one entry per vertex")
        out[bnd] = arr[bnd]
    if not np.all(np.isfinite(out)):
        raise MeshError("boundary data must be finite")
    return out
