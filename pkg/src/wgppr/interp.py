"""Tensor Lobatto-Lagrange interpolation into the WG space."""
from __future__ import annotations

import numpy as np

from .poly import gauss_rule, lagrange_matrix
from .wg import WeakFunction, WGSpace

JUMP_TOL = 1e-11


def nodal_values(space: WGSpace, u) -> np.ndarray:
    """``u`` at every global Lagrange node, in node-id order."""
    xy = space.mesh.node_coords
    return np.asarray(u(xy[:, 0], xy[:, 1]), dtype=float) * np.ones(len(xy))


def embed_nodal(space: WGSpace, values) -> WeakFunction:
    """Continuous weak function whose interior and trace dofs copy nodal values."""
    values = np.asarray(values, dtype=float)
    c = np.empty(space.n_dofs)
    c[space.interior_dofs] = values[space.mesh.element_nodes]
    c[space.edge_dofs] = values[space.mesh.edge_nodes]
    return space.function(c)


def interpolate(space: WGSpace, u) -> WeakFunction:
    """Lobatto interpolant of ``u``, embedded in ``V_h``."""
    return embed_nodal(space, nodal_values(space, u))


def max_trace_jump(space: WGSpace, v: WeakFunction, n_points: int | None = None) -> float:
    """Largest ``|v0|_e - vb|`` over edges, both sides, at Gauss points."""
    g, _ = gauss_rule(n_points or space.k + 3)
    L = lagrange_matrix(space.ref.z, g)
    worst = 0.0
    for E in space.ref.jump_operators():
        d = v.coeffs[space.element_dofs] @ E.T  # (n_elements, k+1) nodal jumps
        worst = max(worst, float(np.abs(d @ L.T).max(initial=0.0)))
    return worst


def trace_jump_is_zero(space: WGSpace, v: WeakFunction, tol: float = JUMP_TOL) -> bool:
    return max_trace_jump(space, v) <= tol
