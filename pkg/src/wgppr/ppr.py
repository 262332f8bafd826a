"""Polynomial preserving recovery of the gradient of a WG solution.

The multi-valued WG function is first collapsed to one value per Lagrange
node by averaging coincident values (see :func:`reformulate`).  A degree
``k+1`` polynomial is then
least-squares fitted on the first-layer patch of each interior vertex, and
the recovered gradient at a node is a bilinear blend, over the corners of
its element, of the corner fits' gradients evaluated at that node.  A
boundary corner contributes the average of the fits of the interior
vertices in its patch.

For a vertex the blend reduces to the corner itself, for an edge node to
the distance-weighted pair of edge end points and for an internal node to
the opposite-area weights of the four corners.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .interp import interpolate
from .linalg import RankDeficientError, least_squares_batch
from .mesh import NodeIndex, TensorMesh
from .wg import WeakFunction, WGSpace


class PatchFitError(RankDeficientError):
    pass


@dataclass(eq=False)
class NodalField:
    """One value per Lagrange node of the continuous space."""

    mesh: TensorMesh
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.mesh.n_nodes,):
            raise ValueError(f"expected {self.mesh.n_nodes} nodal values, got {self.values.shape}")


@dataclass(eq=False)
class PatchFit:
    """Least-squares polynomial on the patch of one interior vertex.

    ``coeffs`` refer to the scaled monomials ``xhat^a yhat^b`` with
    ``xhat = (x - x_c) / h`` in the order of :func:`monomial_exponents`.
    """

    center: int
    origin: tuple[float, float]
    h: float
    k: int
    coeffs: np.ndarray

    def gradient(self, x, y):
        dx = (np.asarray(x, dtype=float) - self.origin[0]) / self.h
        dy = (np.asarray(y, dtype=float) - self.origin[1]) / self.h
        gx, gy = _scaled_gradient(self.k, self.coeffs, dx, dy)
        return gx / self.h, gy / self.h

    def __call__(self, x, y):
        dx = (np.asarray(x, dtype=float) - self.origin[0]) / self.h
        dy = (np.asarray(y, dtype=float) - self.origin[1]) / self.h
        ex = monomial_exponents(self.k + 1)
        return sum(c * dx**a * dy**b for c, (a, b) in zip(self.coeffs, ex))


@dataclass(eq=False)
class RecoveredGradient:
    mesh: TensorMesh
    gx: np.ndarray
    gy: np.ndarray

    def dump(self) -> str:
        """One line per node: id, x, y, Gx, Gy."""
        xy = self.mesh.node_coords
        return "".join(
            f"{i} {xy[i, 0]:.17g} {xy[i, 1]:.17g} {self.gx[i]:.17g} {self.gy[i]:.17g}\n"
            for i in range(self.mesh.n_nodes)
        )


@lru_cache(maxsize=None)
def monomial_exponents(degree: int) -> tuple[tuple[int, int], ...]:
    """``(1, x, y, x^2, xy, y^2, ...)`` as exponent pairs up to total ``degree``."""
    return tuple((d - j, j) for d in range(degree + 1) for j in range(d + 1))


def _vandermonde(k, dx, dy):
    return np.stack([dx**a * dy**b for a, b in monomial_exponents(k + 1)], axis=-1)


def _scaled_gradient(k, coeffs, dx, dy):
    """Gradient in scaled coordinates; ``coeffs`` has the basis on its last axis."""
    gx = 0.0
    gy = 0.0
    for s, (a, b) in enumerate(monomial_exponents(k + 1)):
        c = coeffs[..., s]
        if a:
            gx = gx + c * a * dx ** (a - 1) * dy**b
        if b:
            gy = gy + c * b * dx**a * dy ** (b - 1)
    return gx, gy


WEIGHT_SCHEMES = ("auto", "mean", "interior", "pinned")


def resolve_weights(weights: str, k: int) -> str:
    """``auto`` picks ``mean`` for ``k = 1`` and ``interior`` for higher degrees."""
    if weights not in WEIGHT_SCHEMES:
        raise ValueError(f"weights must be one of {WEIGHT_SCHEMES}, got {weights!r}")
    if weights == "auto":
        return "mean" if k == 1 else "interior"
    return weights


def reformulate(space: WGSpace, u_h: WeakFunction, weights: str = "auto") -> NodalField:
    """Single-valued nodal field from the coincident values of ``u_h``.

    ``weights`` selects the convex combination used at every node:

    ``mean``
        arithmetic mean of all interior and trace values meeting there;
    ``interior``
        arithmetic mean of the adjacent elements' interior values only;
    ``pinned``
        ``mean`` inside the domain, mean of the boundary traces on it
        (zero for ``V_h^0``);
    ``auto``
        ``mean`` for ``k = 1``, ``interior`` otherwise.

    Internal nodes carry a single interior value under every scheme.
    """
    scheme = resolve_weights(weights, space.k)
    mesh = space.mesh
    total = np.zeros(mesh.n_nodes)
    count = np.zeros(mesh.n_nodes)
    np.add.at(total, mesh.element_nodes.ravel(), u_h.interior.ravel())
    np.add.at(count, mesh.element_nodes.ravel(), 1.0)
    if scheme != "interior":
        np.add.at(total, mesh.edge_nodes.ravel(), u_h.trace.ravel())
        np.add.at(count, mesh.edge_nodes.ravel(), 1.0)
    values = total / count

    if scheme == "pinned":
        bedges = mesh.boundary_edges
        btotal = np.zeros(mesh.n_nodes)
        bcount = np.zeros(mesh.n_nodes)
        np.add.at(btotal, mesh.edge_nodes[bedges].ravel(), u_h.trace[bedges].ravel())
        np.add.at(bcount, mesh.edge_nodes[bedges].ravel(), 1.0)
        on_b = bcount > 0
        values[on_b] = btotal[on_b] / bcount[on_b]
    return NodalField(mesh, values)


def _patch_node_grid(mesh: TensorMesh, iv, jv):
    """Global node indices ``(I, J)`` of the patches of vertices ``(iv, jv)``."""
    k = mesh.k
    off = np.arange(-k, k + 1)
    I = k * np.asarray(iv)[:, None, None] + off[None, None, :]
    J = k * np.asarray(jv)[:, None, None] + off[None, :, None]
    I, J = np.broadcast_arrays(I, J)
    return I.reshape(len(I), -1), J.reshape(len(J), -1)


def fit_all_patches(mesh: TensorMesh, values) -> np.ndarray:
    """Scaled coefficients of every interior-vertex fit.

    Returns an array shaped ``(nx + 1, ny + 1, m)`` indexed by vertex grid
    position; rows of boundary vertices are left as NaN.
    """
    k, h = mesh.k, mesh.h
    iv, jv = mesh.interior_vertices.T
    I, J = _patch_node_grid(mesh, iv, jv)
    dx = (mesh.node_x[I] - mesh.node_x[k * iv][:, None]) / h
    dy = (mesh.node_y[J] - mesh.node_y[k * jv][:, None]) / h
    A = _vandermonde(k, dx, dy)
    b = np.asarray(values)[mesh.node_id(I, J)]
    try:
        coef = least_squares_batch(A, b)
    except RankDeficientError as err:
        v = int(mesh.node_id(k * iv[err.patch], k * jv[err.patch]))
        raise PatchFitError(f"rank-deficient patch fit at vertex node {v}", patch=v) from err
    out = np.full((mesh.nx + 1, mesh.ny + 1, len(monomial_exponents(k + 1))), np.nan)
    out[iv, jv] = coef
    return out


def fit_patch(space: WGSpace, field: NodalField, center) -> PatchFit:
    """Fit on the patch of one interior vertex, given as node id or :class:`NodeIndex`."""
    mesh = space.mesh
    nid = center.id if isinstance(center, NodeIndex) else int(center)
    nxn = mesh.node_shape[0]
    I, J = nid % nxn, nid // nxn
    k = mesh.k
    if I % k or J % k or mesh.boundary_nodes[nid]:
        raise ValueError(f"node {nid} is not an interior vertex")
    iv, jv = np.array([I // k]), np.array([J // k])
    PI, PJ = _patch_node_grid(mesh, iv, jv)
    dx = (mesh.node_x[PI] - mesh.node_x[I]) / mesh.h
    dy = (mesh.node_y[PJ] - mesh.node_y[J]) / mesh.h
    A = _vandermonde(k, dx, dy)
    try:
        coef = least_squares_batch(A, field.values[mesh.node_id(PI, PJ)])[0]
    except RankDeficientError as err:
        raise PatchFitError(f"rank-deficient patch fit at vertex node {nid}", patch=nid) from err
    return PatchFit(nid, (float(mesh.node_x[I]), float(mesh.node_y[J])), mesh.h, k, coef)


def vertex_sources(mesh: TensorMesh):
    """Fits feeding each vertex's gradient stencil.

    Returns ``(si, sj, w)`` shaped ``(nx+1, ny+1, 9)``: vertex-grid indices of
    contributing interior vertices and their weights.  An interior vertex
    uses only itself; a boundary vertex averages the interior vertices of
    its patch.  Unused slots carry weight zero.
    """
    nvx, nvy = mesh.nx + 1, mesh.ny + 1
    iv, jv = np.meshgrid(np.arange(nvx), np.arange(nvy), indexing="ij")
    d = np.array([(a, b) for b in (-1, 0, 1) for a in (-1, 0, 1)])
    si = iv[..., None] + d[:, 0]
    sj = jv[..., None] + d[:, 1]
    inner = (si >= 1) & (si <= nvx - 2) & (sj >= 1) & (sj <= nvy - 2)
    interior_v = (iv >= 1) & (iv <= nvx - 2) & (jv >= 1) & (jv <= nvy - 2)
    w = inner.astype(float)
    self_slot = 4
    w[interior_v] = 0.0
    w[interior_v, self_slot] = 1.0
    m = w.sum(axis=-1, keepdims=True)
    if np.any(m == 0):
        raise ValueError("a boundary vertex has no interior vertex in its patch")
    w = w / m
    return np.clip(si, 0, nvx - 1), np.clip(sj, 0, nvy - 1), w


def node_corner_weights(mesh: TensorMesh):
    """Owning element corners and blend weights for every node.

    Returns ``(ci, cj, w)`` shaped ``(n_nodes, 4)``; corners are ordered
    lower-left, lower-right, upper-right, upper-left.  The weight of a
    corner is the area of the sub-rectangle opposite to it over the element
    area, which on an edge reduces to the distance ratio to the far end.
    """
    k = mesh.k
    nxn, nyn = mesh.node_shape
    I = np.tile(np.arange(nxn), nyn)
    J = np.repeat(np.arange(nyn), nxn)
    i = np.minimum(I // k, mesh.nx - 1)
    j = np.minimum(J // k, mesh.ny - 1)
    t = (mesh.node_x[I] - mesh.xs[i]) / mesh.dx[i]
    s = (mesh.node_y[J] - mesh.ys[j]) / mesh.dy[j]
    ci = np.column_stack([i, i + 1, i + 1, i])
    cj = np.column_stack([j, j, j + 1, j + 1])
    w = np.column_stack([(1 - t) * (1 - s), t * (1 - s), t * s, (1 - t) * s])
    return ci, cj, w


def recover_from_field(space: WGSpace, field: NodalField) -> RecoveredGradient:
    mesh = space.mesh
    k, h = mesh.k, mesh.h
    coef = fit_all_patches(mesh, field.values)
    si, sj, sw = vertex_sources(mesh)
    ci, cj, cw = node_corner_weights(mesh)
    X, Y = mesh.node_coords.T
    gx = np.zeros(mesh.n_nodes)
    gy = np.zeros(mesh.n_nodes)
    for c in range(4):
        for slot in range(si.shape[-1]):
            w = cw[:, c] * sw[ci[:, c], cj[:, c], slot]
            use = np.flatnonzero(w != 0.0)
            if use.size == 0:
                continue
            vi = si[ci[use, c], cj[use, c], slot]
            vj = sj[ci[use, c], cj[use, c], slot]
            dx = (X[use] - mesh.xs[vi]) / h
            dy = (Y[use] - mesh.ys[vj]) / h
            px, py = _scaled_gradient(k, coef[vi, vj], dx, dy)
            gx[use] += w[use] * px / h
            gy[use] += w[use] * py / h
    return RecoveredGradient(mesh, gx, gy)


def recover(space: WGSpace, u_h: WeakFunction, weights: str = "auto") -> RecoveredGradient:
    """Recovered gradient ``G_h u_h`` as nodal values of two continuous fields."""
    return recover_from_field(space, reformulate(space, u_h, weights))


def recover_exact(space: WGSpace, u) -> RecoveredGradient:
    """``G_h u``, defined as the recovery of the Lobatto interpolant of ``u``."""
    return recover(space, interpolate(space, u))
