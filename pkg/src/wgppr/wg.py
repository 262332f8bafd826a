"""Weak Galerkin spaces, the discrete weak gradient and the stabilised solve.

Degrees of freedom of a weak function ``v = {v0, vb}``:

* ``(k+1)^2`` interior values per element at tensor Lobatto nodes, stored
  element by element in the mesh's local node order;
* ``k+1`` trace values per edge at edge Lobatto nodes, ordered by
  increasing coordinate along the edge.

The element-local coefficient vector is the interior block followed by
the trace blocks of the bottom, right, top and left edges.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .linalg import solve_spd
from .mesh import TensorMesh
from .poly import (
    WGradBasis,
    gauss_rule,
    gauss_rule_2d,
    lagrange_deriv_matrix,
    lagrange_matrix,
    legendre_deriv_matrix,
    legendre_matrix,
    lobatto_points,
)

H_MODES = ("element", "global")


class ParameterError(ValueError):
    pass


class ReferenceElement:
    """Per-degree tables on the reference square, shared by all elements."""

    def __init__(self, k: int, quad_points: int | None = None):
        self.k = k
        self.nq = quad_points or k + 3
        self.z = lobatto_points(k)
        self.wgrad = WGradBasis(k)
        gx, gw = gauss_rule(self.nq)
        L = lagrange_matrix(self.z, gx)
        P = legendre_matrix(k, gx)
        dP = legendre_deriv_matrix(k, gx)
        # 1-D moment tables: rows nodal index, columns Legendre index
        self.lP = (L * gw[:, None]).T @ P
        self.ldP = (L * gw[:, None]).T @ dP
        self.mass1d = (L * gw[:, None]).T @ L
        self.P_end = legendre_matrix(k, [-1.0, 1.0])  # rows: xi=-1, xi=+1
        self.n_int = (k + 1) ** 2
        self.n_local = self.n_int + 4 * (k + 1)

    def edge_slice(self, side: int) -> slice:
        start = self.n_int + side * (self.k + 1)
        return slice(start, start + self.k + 1)

    def interior_index(self, p, q):
        return q * (self.k + 1) + p

    def moments(self, hx: float, hy: float) -> tuple[np.ndarray, np.ndarray]:
        """Linear maps from local coefficients to the weak-gradient moments.

        Row ``s`` of the first matrix gives the right-hand side
        ``-(v0, d/dx q_s)_T + <vb, q_s n_x>_{dT}`` for the ``s``-th basis
        field of the first component; likewise for the second.
        """
        k = self.k
        nb = self.wgrad
        B1 = np.zeros((nb.dim, self.n_local))
        B2 = np.zeros((nb.dim, self.n_local))
        p = np.tile(np.arange(k + 1), k + 1)
        q = np.repeat(np.arange(k + 1), k + 1)
        for s, (a, b) in enumerate(nb.ab1):
            B1[s, : self.n_int] = -0.5 * hy * self.ldP[p, a] * self.lP[q, b]
            B1[s, self.edge_slice(1)] = 0.5 * hy * self.P_end[1, a] * self.lP[:, b]
            B1[s, self.edge_slice(3)] = -0.5 * hy * self.P_end[0, a] * self.lP[:, b]
        for s, (a, b) in enumerate(nb.ab2):
            B2[s, : self.n_int] = -0.5 * hx * self.lP[p, a] * self.ldP[q, b]
            B2[s, self.edge_slice(2)] = 0.5 * hx * self.P_end[1, b] * self.lP[:, a]
            B2[s, self.edge_slice(0)] = -0.5 * hx * self.P_end[0, b] * self.lP[:, a]
        return B1, B2

    def gram(self, hx: float, hy: float) -> tuple[np.ndarray, np.ndarray]:
        g1, g2 = self.wgrad.reference_gram()
        jac = 0.25 * hx * hy
        return g1 * jac, g2 * jac

    def weak_gradient_operator(self, hx: float, hy: float) -> tuple[np.ndarray, np.ndarray]:
        """Matrices taking local coefficients to weak-gradient coefficients."""
        B1, B2 = self.moments(hx, hy)
        g1, g2 = self.gram(hx, hy)
        return B1 / g1[:, None], B2 / g2[:, None]

    def jump_operators(self) -> list[np.ndarray]:
        """Per side, the map from local coefficients to nodal values of ``v0|_e - vb``."""
        k = self.k
        r = np.arange(k + 1)
        faces = [
            self.interior_index(r, 0),  # bottom
            self.interior_index(k, r),  # right
            self.interior_index(r, k),  # top
            self.interior_index(0, r),  # left
        ]
        ops = []
        for side, idx in enumerate(faces):
            E = np.zeros((k + 1, self.n_local))
            E[r, idx] = 1.0
            E[r, self.edge_slice(side).start + r] -= 1.0
            ops.append(E)
        return ops

    def gradient_block(self, hx: float, hy: float) -> np.ndarray:
        W1, W2 = self.weak_gradient_operator(hx, hy)
        B1, B2 = self.moments(hx, hy)
        return W1.T @ B1 + W2.T @ B2

    def stabilizer_block(self, hx: float, hy: float) -> np.ndarray:
        S = np.zeros((self.n_local, self.n_local))
        for side, E in enumerate(self.jump_operators()):
            length = hx if side % 2 == 0 else hy
            S += 0.5 * length * E.T @ self.mass1d @ E
        return S


class WGSpace:
    """Weak Galerkin space ``V_h`` of degree ``mesh.k`` with stabiliser exponent ``alpha``."""

    def __init__(self, mesh: TensorMesh, alpha: float = 1.0, h_mode: str = "element"):
        if alpha < 1:
            raise ParameterError(f"stabiliser exponent alpha must be >= 1, got {alpha}")
        if h_mode not in H_MODES:
            raise ParameterError(f"h_mode must be one of {H_MODES}, got {h_mode!r}")
        self.mesh = mesh
        self.k = mesh.k
        self.alpha = float(alpha)
        self.h_mode = h_mode
        self.ref = ReferenceElement(self.k)

    @property
    def n_interior_dofs(self) -> int:
        return self.ref.n_int * self.mesh.n_elements

    @property
    def n_dofs(self) -> int:
        return self.n_interior_dofs + (self.k + 1) * self.mesh.n_edges

    @cached_property
    def interior_dofs(self) -> np.ndarray:
        """``(n_elements, (k+1)^2)`` global ids of interior dofs."""
        return np.arange(self.n_interior_dofs).reshape(self.mesh.n_elements, -1)

    @cached_property
    def edge_dofs(self) -> np.ndarray:
        """``(n_edges, k+1)`` global ids of trace dofs."""
        return self.n_interior_dofs + np.arange((self.k + 1) * self.mesh.n_edges).reshape(
            self.mesh.n_edges, -1
        )

    @cached_property
    def element_dofs(self) -> np.ndarray:
        """``(n_elements, n_local)`` global ids in element-local order."""
        return np.hstack([self.interior_dofs, *(self.edge_dofs[self.mesh.element_edges[:, s]] for s in range(4))])

    @cached_property
    def boundary_dofs(self) -> np.ndarray:
        mask = np.zeros(self.n_dofs, dtype=bool)
        mask[self.edge_dofs[self.mesh.boundary_edges].ravel()] = True
        return mask

    @cached_property
    def free_dofs(self) -> np.ndarray:
        return np.flatnonzero(~self.boundary_dofs)

    def stabilizer_scale(self) -> np.ndarray:
        """Per-element coefficient ``h^-alpha`` (or ``h_T^-alpha``)."""
        if self.h_mode == "global":
            return np.full(self.mesh.n_elements, self.mesh.h ** -self.alpha)
        return self.mesh.element_diameters ** -self.alpha

    def _element_groups(self):
        """Group elements sharing width, height and stabiliser scale."""
        key = np.column_stack([self.mesh.element_sizes, self.stabilizer_scale()])
        uniq, inverse = np.unique(np.round(key, 14), axis=0, return_inverse=True)
        reps = [int(np.flatnonzero(inverse == g)[0]) for g in range(len(uniq))]
        return reps, inverse.ravel()

    def local_matrices(self, stabilizer: bool = True, gradient: bool = True):
        """Local stiffness blocks per group and the element-to-group map."""
        reps, inverse = self._element_groups()
        sizes = self.mesh.element_sizes
        tau = self.stabilizer_scale()
        blocks = []
        for e in reps:
            hx, hy = sizes[e]
            K = np.zeros((self.ref.n_local, self.ref.n_local))
            if gradient:
                K += self.ref.gradient_block(hx, hy)
            if stabilizer:
                K += tau[e] * self.ref.stabilizer_block(hx, hy)
            blocks.append(K)
        return np.array(blocks), inverse

    def _assemble(self, **kw) -> sp.csr_matrix:
        blocks, inverse = self.local_matrices(**kw)
        dofs = self.element_dofs
        nl = dofs.shape[1]
        rows = np.repeat(dofs, nl, axis=1).ravel()
        cols = np.tile(dofs, (1, nl)).ravel()
        data = blocks[inverse].reshape(len(inverse), -1).ravel()
        A = sp.coo_matrix((data, (rows, cols)), shape=(self.n_dofs, self.n_dofs)).tocsr()
        A.sum_duplicates()
        return A

    @cached_property
    def matrix(self) -> sp.csr_matrix:
        """Unreduced matrix of ``a_s`` over all dofs."""
        return self._assemble()

    @cached_property
    def stabilizer_matrix(self) -> sp.csr_matrix:
        return self._assemble(gradient=False)

    def assemble(self) -> sp.csr_matrix:
        """Matrix of ``a_s`` restricted to the non-boundary dofs."""
        free = self.free_dofs
        return self.matrix[free][:, free].tocsr()

    def element_quadrature(self, n: int):
        """Physical tensor-Gauss points and weights of every element.

        Returns ``(x, y, w, xi, eta)`` with ``x, y, w`` shaped
        ``(n_elements, n*n)`` and reference points ``xi, eta`` shaped ``(n*n,)``.
        """
        xi, eta, w = gauss_rule_2d(n)
        m = self.mesh
        x0 = np.tile(m.xs[:-1], m.ny)
        y0 = np.repeat(m.ys[:-1], m.nx)
        hx, hy = m.element_sizes.T
        x = x0[:, None] + 0.5 * hx[:, None] * (xi + 1.0)
        y = y0[:, None] + 0.5 * hy[:, None] * (eta + 1.0)
        W = 0.25 * (hx * hy)[:, None] * w
        return x, y, W, xi, eta

    def interior_basis(self, xi, eta) -> np.ndarray:
        """Tensor nodal basis at reference points, ``(npts, (k+1)^2)``."""
        Lx = lagrange_matrix(self.ref.z, xi)
        Ly = lagrange_matrix(self.ref.z, eta)
        return (Ly[:, :, None] * Lx[:, None, :]).reshape(len(Lx), -1)

    def interior_basis_grad(self, xi, eta) -> tuple[np.ndarray, np.ndarray]:
        """Reference derivatives of the tensor nodal basis."""
        Lx = lagrange_matrix(self.ref.z, xi)
        Ly = lagrange_matrix(self.ref.z, eta)
        dLx = lagrange_deriv_matrix(self.ref.z, xi)
        dLy = lagrange_deriv_matrix(self.ref.z, eta)
        n = len(Lx)
        gx = (Ly[:, :, None] * dLx[:, None, :]).reshape(n, -1)
        gy = (dLy[:, :, None] * Lx[:, None, :]).reshape(n, -1)
        return gx, gy

    def load_vector(self, f, quad_points: int | None = None) -> np.ndarray:
        """``(f, phi_0)`` for every dof; trace dofs get zero.

        ``f`` is generally not a polynomial, so the default rule is the
        ``k + 5`` point rule used for error norms rather than the
        assembly rule.
        """
        n = quad_points or self.k + 5
        x, y, W, xi, eta = self.element_quadrature(n)
        phi = self.interior_basis(xi, eta)
        vals = np.asarray(f(x, y), dtype=float) * np.ones_like(x)
        b = np.zeros(self.n_dofs)
        b[self.interior_dofs] = (vals * W) @ phi
        return b

    def function(self, coeffs=None) -> "WeakFunction":
        if coeffs is None:
            coeffs = np.zeros(self.n_dofs)
        return WeakFunction(self, np.asarray(coeffs, dtype=float))


@dataclass(eq=False)
class WeakFunction:
    """Coefficient vector of ``v = {v0, vb}`` over all dofs of a space."""

    space: WGSpace
    coeffs: np.ndarray

    def __post_init__(self):
        if self.coeffs.shape != (self.space.n_dofs,):
            raise ValueError(f"expected {self.space.n_dofs} coefficients, got {self.coeffs.shape}")

    def local(self, element: int) -> np.ndarray:
        return self.coeffs[self.space.element_dofs[element]]

    @property
    def interior(self) -> np.ndarray:
        """``(n_elements, (k+1)^2)`` interior nodal values."""
        return self.coeffs[self.space.interior_dofs]

    @property
    def trace(self) -> np.ndarray:
        """``(n_edges, k+1)`` trace nodal values."""
        return self.coeffs[self.space.edge_dofs]

    def _wrap(self, c):
        return WeakFunction(self.space, c)

    def __add__(self, other):
        return self._wrap(self.coeffs + other.coeffs)

    def __sub__(self, other):
        return self._wrap(self.coeffs - other.coeffs)

    def __neg__(self):
        return self._wrap(-self.coeffs)

    def __mul__(self, c):
        return self._wrap(c * self.coeffs)

    __rmul__ = __mul__

    def dump(self) -> str:
        """One line per dof: id, kind (I/E), owner id, local index, value."""
        sp_ = self.space
        lines = []
        n_loc = sp_.ref.n_int
        for d in range(sp_.n_dofs):
            if d < sp_.n_interior_dofs:
                kind, owner, loc = "I", d // n_loc, d % n_loc
            else:
                r = d - sp_.n_interior_dofs
                kind, owner, loc = "E", r // (sp_.k + 1), r % (sp_.k + 1)
            lines.append(f"{d} {kind} {owner} {loc} {self.coeffs[d]:.17g}")
        return "\n".join(lines) + "\n"


def weak_gradient_local(space: WGSpace, element: int, local_coeffs) -> tuple[np.ndarray, np.ndarray]:
    """Coefficients of the weak gradient in the orthogonal basis of ``W_k(T)``."""
    hx, hy = space.mesh.element_sizes[element]
    W1, W2 = space.ref.weak_gradient_operator(hx, hy)
    c = np.asarray(local_coeffs, dtype=float)
    return W1 @ c, W2 @ c


def eval_wgrad(space: WGSpace, coeffs: tuple[np.ndarray, np.ndarray], xi, eta) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate weak-gradient coefficients at reference points of an element."""
    v1, v2 = space.ref.wgrad.values(xi, eta)
    return v1 @ coeffs[0], v2 @ coeffs[1]


def load_vector(space: WGSpace, f) -> np.ndarray:
    return space.load_vector(f)


def assemble(space: WGSpace) -> sp.csr_matrix:
    return space.assemble()


def solve_wg(space: WGSpace, f, method: str = "direct") -> WeakFunction:
    """WG approximation in ``V_h^0`` of ``-Δu = f`` with ``u = 0`` on the boundary."""
    b = space.load_vector(f)
    free = space.free_dofs
    u = np.zeros(space.n_dofs)
    u[free] = solve_spd(space.assemble(), b[free], method=method)
    return space.function(u)


def stabilizer_value(space: WGSpace, v: WeakFunction) -> float:
    """``s(v, v)`` summed from squared jumps, free of quadratic-form cancellation."""
    ref = space.ref
    local = v.coeffs[space.element_dofs]
    hx, hy = space.mesh.element_sizes.T
    total = np.zeros(space.mesh.n_elements)
    for side, E in enumerate(ref.jump_operators()):
        j = local @ E.T
        length = hx if side % 2 == 0 else hy
        total += 0.5 * length * np.einsum("ep,pq,eq->e", j, ref.mass1d, j)
    return float(total @ space.stabilizer_scale())


def energy_norm(space: WGSpace, v: WeakFunction) -> float:
    c = v.coeffs
    return float(np.sqrt(max(c @ (space.matrix @ c), 0.0)))
