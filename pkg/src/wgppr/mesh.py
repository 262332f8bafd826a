"""Rectangular tensor-product meshes of the unit square.

A mesh is stored as two breakpoint sequences.  Elements, edges and the
Lagrange nodes of the continuous space ``Q_k ∩ C0`` are all addressed by
integer tensor indices, so no coordinate comparison is ever needed to
identify shared entities.

Numbering conventions (``nx = len(xs) - 1``, ``ny = len(ys) - 1``):

* element ``(i, j)`` covers ``[xs[i], xs[i+1]] x [ys[j], ys[j+1]]`` and has
  id ``j * nx + i``;
* vertical edge ``(i, j)`` lies on ``x = xs[i]`` spanning ``[ys[j], ys[j+1]]``
  and has id ``j * (nx + 1) + i``;
* horizontal edge ``(i, j)`` lies on ``y = ys[j]`` spanning
  ``[xs[i], xs[i+1]]`` and has id ``n_vertical + j * nx + i``;
* global node ``(I, J)`` with ``0 <= I <= k*nx`` has id ``J * (k*nx + 1) + I``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .poly import lobatto_points


class MeshError(ValueError):
    """Raised for invalid mesh parameters."""


class NodeKind(enum.Enum):
    INTERIOR_VERTEX = "InteriorVertex"
    BOUNDARY_VERTEX = "BoundaryVertex"
    EDGE_NODE = "EdgeNode"
    INTERNAL_NODE = "InternalNode"


# Base partition of the perturbed family, as labelled (3-digit coordinates).
PERTURBED_XS = (0.0, 0.254, 0.5, 0.746, 1.0)
PERTURBED_YS = (0.0, 0.29, 0.507, 0.79, 1.0)
# The same partition at the positions the grid lines are drawn (5 units = 1).
DRAWN_XS = (0.0, 1.269 / 5, 2.5025 / 5, 3.731 / 5, 1.0)
DRAWN_YS = (0.0, 1.451 / 5, 2.533 / 5, 3.952 / 5, 1.0)
PERTURBED_BASES = {"labels": (PERTURBED_XS, PERTURBED_YS), "drawn": (DRAWN_XS, DRAWN_YS)}


@dataclass(frozen=True, eq=False)
class TensorMesh:
    """Axis-aligned tensor mesh of ``[0, 1]^2`` carrying a polynomial degree."""

    xs: np.ndarray
    ys: np.ndarray
    k: int = 1

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        ys = np.asarray(self.ys, dtype=float)
        for name, b in (("xs", xs), ("ys", ys)):
            if b.ndim != 1 or b.size < 2:
                raise MeshError(f"{name} needs at least two breakpoints")
            if b[0] != 0.0 or b[-1] != 1.0:
                raise MeshError(f"{name} must start at 0 and end at 1")
            if np.any(np.diff(b) <= 0):
                raise MeshError(f"{name} must be strictly increasing")
        if int(self.k) < 1:
            raise MeshError("degree k must be >= 1")
        xs.setflags(write=False)
        ys.setflags(write=False)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)
        object.__setattr__(self, "k", int(self.k))

    # -- counts ---------------------------------------------------------
    @property
    def nx(self) -> int:
        return self.xs.size - 1

    @property
    def ny(self) -> int:
        return self.ys.size - 1

    @property
    def n_elements(self) -> int:
        return self.nx * self.ny

    @property
    def n_vertical_edges(self) -> int:
        return (self.nx + 1) * self.ny

    @property
    def n_horizontal_edges(self) -> int:
        return self.nx * (self.ny + 1)

    @property
    def n_edges(self) -> int:
        return self.n_vertical_edges + self.n_horizontal_edges

    @property
    def node_shape(self) -> tuple[int, int]:
        """Shape ``(NX, NY)`` of the global node grid."""
        return self.k * self.nx + 1, self.k * self.ny + 1

    @property
    def n_nodes(self) -> int:
        nxn, nyn = self.node_shape
        return nxn * nyn

    # -- geometry -------------------------------------------------------
    @cached_property
    def dx(self) -> np.ndarray:
        return np.diff(self.xs)

    @cached_property
    def dy(self) -> np.ndarray:
        return np.diff(self.ys)

    @cached_property
    def element_sizes(self) -> np.ndarray:
        """``(n_elements, 2)`` array of element widths and heights."""
        hx = np.tile(self.dx, self.ny)
        hy = np.repeat(self.dy, self.nx)
        return np.column_stack([hx, hy])

    @cached_property
    def element_diameters(self) -> np.ndarray:
        return np.hypot(self.element_sizes[:, 0], self.element_sizes[:, 1])

    @property
    def h(self) -> float:
        """Global mesh size, the largest element diameter."""
        return float(self.element_diameters.max())

    @cached_property
    def node_x(self) -> np.ndarray:
        """x-coordinates of the global node grid columns."""
        return _lobatto_breakpoints(self.xs, self.k)

    @cached_property
    def node_y(self) -> np.ndarray:
        return _lobatto_breakpoints(self.ys, self.k)

    @cached_property
    def node_coords(self) -> np.ndarray:
        """``(n_nodes, 2)`` coordinates in node-id order."""
        X, Y = np.meshgrid(self.node_x, self.node_y)
        return np.column_stack([X.ravel(), Y.ravel()])

    def node_id(self, I, J):
        return np.asarray(J) * self.node_shape[0] + np.asarray(I)

    def element_id(self, i, j):
        return np.asarray(j) * self.nx + np.asarray(i)

    def vertical_edge_id(self, i, j):
        return np.asarray(j) * (self.nx + 1) + np.asarray(i)

    def horizontal_edge_id(self, i, j):
        return self.n_vertical_edges + np.asarray(j) * self.nx + np.asarray(i)

    @cached_property
    def element_nodes(self) -> np.ndarray:
        """``(n_elements, (k+1)^2)`` global node ids of each element.

        Local ordering is ``q * (k + 1) + p`` with ``p`` the x-index.
        """
        k = self.k
        i, j = np.meshgrid(np.arange(self.nx), np.arange(self.ny))
        i, j = i.ravel(), j.ravel()
        p = np.tile(np.arange(k + 1), k + 1)
        q = np.repeat(np.arange(k + 1), k + 1)
        return self.node_id(k * i[:, None] + p, k * j[:, None] + q)

    @cached_property
    def edge_nodes(self) -> np.ndarray:
        """``(n_edges, k+1)`` global node ids along each edge, increasing coordinate."""
        k = self.k
        r = np.arange(k + 1)
        iv, jv = np.meshgrid(np.arange(self.nx + 1), np.arange(self.ny))
        vert = self.node_id(k * iv.ravel()[:, None], k * jv.ravel()[:, None] + r)
        ih, jh = np.meshgrid(np.arange(self.nx), np.arange(self.ny + 1))
        horiz = self.node_id(k * ih.ravel()[:, None] + r, k * jh.ravel()[:, None])
        return np.vstack([vert, horiz])

    @cached_property
    def boundary_edges(self) -> np.ndarray:
        """Boolean mask over edge ids marking edges on the boundary."""
        iv = np.tile(np.arange(self.nx + 1), self.ny)
        jh = np.repeat(np.arange(self.ny + 1), self.nx)
        return np.concatenate([(iv == 0) | (iv == self.nx), (jh == 0) | (jh == self.ny)])

    @cached_property
    def element_edges(self) -> np.ndarray:
        """``(n_elements, 4)`` edge ids in the order bottom, right, top, left."""
        i, j = np.meshgrid(np.arange(self.nx), np.arange(self.ny))
        i, j = i.ravel(), j.ravel()
        return np.column_stack([
            self.horizontal_edge_id(i, j),
            self.vertical_edge_id(i + 1, j),
            self.horizontal_edge_id(i, j + 1),
            self.vertical_edge_id(i, j),
        ])

    # -- node classification -------------------------------------------
    @cached_property
    def node_kinds(self) -> np.ndarray:
        """Per node id, an integer code indexing :data:`KIND_ORDER`."""
        nxn, nyn = self.node_shape
        I, J = np.meshgrid(np.arange(nxn), np.arange(nyn))
        I, J = I.ravel(), J.ravel()
        on_x = I % self.k == 0
        on_y = J % self.k == 0
        boundary = (I == 0) | (I == nxn - 1) | (J == 0) | (J == nyn - 1)
        code = np.full(I.shape, 3)
        code[on_x ^ on_y] = 2
        code[on_x & on_y] = 0
        code[on_x & on_y & boundary] = 1
        return code

    @cached_property
    def boundary_nodes(self) -> np.ndarray:
        nxn, nyn = self.node_shape
        I, J = np.meshgrid(np.arange(nxn), np.arange(nyn))
        return ((I == 0) | (I == nxn - 1) | (J == 0) | (J == nyn - 1)).ravel()

    @cached_property
    def interior_vertices(self) -> np.ndarray:
        """Vertex-grid indices ``(iv, jv)`` of every interior vertex, shape ``(m, 2)``."""
        iv, jv = np.meshgrid(np.arange(1, self.nx), np.arange(1, self.ny))
        return np.column_stack([iv.ravel(), jv.ravel()])

    def refine(self) -> "TensorMesh":
        """Insert the midpoint of every interval in both directions."""
        return TensorMesh(_bisect(self.xs), _bisect(self.ys), self.k)

    def with_degree(self, k: int) -> "TensorMesh":
        return TensorMesh(self.xs, self.ys, k)

    def dump(self) -> str:
        """Plain-text breakpoint listing with ``X``/``Y`` section headers."""
        lines = ["X", *(repr(float(v)) for v in self.xs), "Y", *(repr(float(v)) for v in self.ys)]
        return "\n".join(lines) + "\n"


KIND_ORDER = (
    NodeKind.INTERIOR_VERTEX,
    NodeKind.BOUNDARY_VERTEX,
    NodeKind.EDGE_NODE,
    NodeKind.INTERNAL_NODE,
)


def _bisect(b: np.ndarray) -> np.ndarray:
    out = np.empty(2 * b.size - 1)
    out[0::2] = b
    out[1::2] = 0.5 * (b[:-1] + b[1:])
    return out


def _lobatto_breakpoints(b: np.ndarray, k: int) -> np.ndarray:
    z = lobatto_points(k)
    left, width = b[:-1], np.diff(b)
    pts = left[:, None] + 0.5 * width[:, None] * (z[None, :-1] + 1.0)
    return np.append(pts.ravel(), b[-1])


def build_uniform(n: int, k: int = 1) -> TensorMesh:
    """Uniform ``n x n`` mesh; ``n >= 2`` so that an interior vertex exists."""
    if int(n) != n or n < 2:
        raise MeshError(f"uniform mesh needs n >= 2, got {n}")
    b = np.arange(n + 1) / n
    return TensorMesh(b, b.copy(), k)


def build_perturbed(level: int, k: int = 1, base: str = "labels") -> TensorMesh:
    """Fixed 4x4 non-uniform partition refined ``level`` times by bisection.

    ``base`` picks the coordinates of the initial partition: ``"labels"``
    uses the rounded values written next to the grid lines, ``"drawn"`` the
    slightly different positions at which they are actually drawn.
    """
    if level < 0:
        raise MeshError(f"level must be >= 0, got {level}")
    if base not in PERTURBED_BASES:
        raise MeshError(f"unknown perturbed base {base!r}; choose from {sorted(PERTURBED_BASES)}")
    xs, ys = PERTURBED_BASES[base]
    mesh = TensorMesh(np.array(xs), np.array(ys), k)
    for _ in range(level):
        mesh = mesh.refine()
    return mesh


# -- object-level queries ---------------------------------------------------

@dataclass(frozen=True)
class NodeIndex:
    id: int
    location: tuple[float, float]
    kind: NodeKind
    elements: frozenset = field(default_factory=frozenset)
    edges: frozenset = field(default_factory=frozenset)
    boundary: bool = False


@dataclass(frozen=True)
class VertexPatch:
    center: NodeIndex
    elements: tuple
    nodes: tuple
    interior_vertices: tuple


def _incident_intervals(I: int, k: int, n: int) -> list[int]:
    if I % k:
        return [I // k]
    c = I // k
    return [t for t in (c - 1, c) if 0 <= t < n]


def node_index(mesh: TensorMesh, nid: int) -> NodeIndex:
    nxn, _ = mesh.node_shape
    I, J = nid % nxn, nid // nxn
    k = mesh.k
    ei = _incident_intervals(I, k, mesh.nx)
    ej = _incident_intervals(J, k, mesh.ny)
    elements = frozenset(int(mesh.element_id(i, j)) for i in ei for j in ej)
    edges = set()
    if I % k == 0:
        edges.update(int(mesh.vertical_edge_id(I // k, j)) for j in ej)
    if J % k == 0:
        edges.update(int(mesh.horizontal_edge_id(i, J // k)) for i in ei)
    return NodeIndex(
        id=int(nid),
        location=(float(mesh.node_x[I]), float(mesh.node_y[J])),
        kind=KIND_ORDER[mesh.node_kinds[nid]],
        elements=elements,
        edges=frozenset(edges),
        boundary=bool(mesh.boundary_nodes[nid]),
    )


def classify_nodes(mesh: TensorMesh) -> list[NodeIndex]:
    """Every Lagrange node of the continuous space, once each, in id order."""
    return [node_index(mesh, nid) for nid in range(mesh.n_nodes)]


def vertex_patch(mesh: TensorMesh, v: NodeIndex) -> VertexPatch:
    """First-layer element patch around a vertex."""
    if v.kind not in (NodeKind.INTERIOR_VERTEX, NodeKind.BOUNDARY_VERTEX):
        raise ValueError(f"node {v.id} is a {v.kind.value}, not a vertex")
    elements = tuple(sorted(v.elements))
    nodes = tuple(sorted({int(n) for e in elements for n in mesh.element_nodes[e]}))
    inner = tuple(n for n in nodes if mesh.node_kinds[n] == 0)
    return VertexPatch(center=v, elements=elements, nodes=nodes, interior_vertices=inner)
