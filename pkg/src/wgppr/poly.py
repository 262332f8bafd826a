"""One-dimensional bases and quadrature on the reference interval [-1, 1]."""
from __future__ import annotations

from functools import lru_cache

import numpy as np
from numpy.polynomial import legendre as npleg


class UnsupportedError(ValueError):
    """Requested degree or point count is outside the supported range."""


@lru_cache(maxsize=None)
def _lobatto(k: int) -> np.ndarray:
    if k < 1:
        raise UnsupportedError(f"Lobatto points need k >= 1, got {k}")
    # interior points are the roots of P_k'; polish the companion-matrix roots
    dcoef = npleg.legder(np.eye(k + 1)[k])
    ddcoef = npleg.legder(dcoef)
    inner = np.sort(np.real(npleg.legroots(dcoef))) if k > 1 else np.empty(0)
    for _ in range(3):
        inner = inner - npleg.legval(inner, dcoef) / npleg.legval(inner, ddcoef)
    inner = 0.5 * (inner - inner[::-1])  # enforce exact symmetry
    pts = np.concatenate([[-1.0], inner, [1.0]])
    pts.setflags(write=False)
    return pts


def lobatto_points(k: int) -> np.ndarray:
    """The ``k+1`` zeros of ``(1 - x^2) P_k'(x)``, ascending."""
    return _lobatto(int(k))


def lobatto_polynomial(k: int, x) -> np.ndarray:
    """``omega_{k+1}(x) = (1 - x^2) P_k'(x)``; only its zeros matter."""
    x = np.asarray(x, dtype=float)
    return (1.0 - x * x) * npleg.legval(x, npleg.legder(np.eye(k + 1)[k]))


def lagrange_matrix(points, x) -> np.ndarray:
    """Values ``l_i(x)`` of the nodal basis on ``points``; shape ``(len(x), len(points))``."""
    z = np.asarray(points, dtype=float)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = z.size
    out = np.ones((x.size, n))
    for i in range(n):
        for j in range(n):
            if j != i:
                out[:, i] *= (x - z[j]) / (z[i] - z[j])
    return out


def lagrange_deriv_matrix(points, x) -> np.ndarray:
    """Derivatives ``l_i'(x)``; same layout as :func:`lagrange_matrix`."""
    z = np.asarray(points, dtype=float)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = z.size
    out = np.zeros((x.size, n))
    for i in range(n):
        for m in range(n):
            if m == i:
                continue
            term = np.full(x.shape, 1.0 / (z[i] - z[m]))
            for j in range(n):
                if j != i and j != m:
                    term *= (x - z[j]) / (z[i] - z[j])
            out[:, i] += term
    return out


def lagrange_eval(points, i: int, x, derivative: bool = False):
    """``l_i(x)`` (or ``l_i'(x)``) for the nodal basis on ``points``."""
    n = len(points)
    if not 0 <= i < n:
        raise IndexError(f"basis index {i} out of range for {n} points")
    scalar = np.ndim(x) == 0
    mat = lagrange_deriv_matrix(points, x) if derivative else lagrange_matrix(points, x)
    col = mat[:, i]
    return float(col[0]) if scalar else col


MAX_GAUSS_POINTS = 20


@lru_cache(maxsize=None)
def _gauss(n: int):
    if not 1 <= n <= MAX_GAUSS_POINTS:
        raise UnsupportedError(f"Gauss rule supports 1..{MAX_GAUSS_POINTS} points, got {n}")
    x, w = npleg.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    """``n``-point Gauss-Legendre points and weights on [-1, 1]."""
    return _gauss(int(n))


def gauss_rule_2d(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Tensor Gauss rule on the reference square.

    Returns ``(xi, eta, w)`` flattened with ``xi`` varying fastest.
    """
    x, w = gauss_rule(n)
    XI, ETA = np.meshgrid(x, x)
    return XI.ravel(), ETA.ravel(), np.outer(w, w).ravel()


def legendre_matrix(degree: int, x) -> np.ndarray:
    """``P_0 .. P_degree`` at ``x``; shape ``(len(x), degree+1)``."""
    return npleg.legvander(np.atleast_1d(np.asarray(x, dtype=float)), degree)


def legendre_deriv_matrix(degree: int, x) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros((x.size, degree + 1))
    for a in range(1, degree + 1):
        out[:, a] = npleg.legval(x, npleg.legder(np.eye(degree + 1)[a]))
    return out


def legendre_norms(degree: int) -> np.ndarray:
    """``int_{-1}^{1} P_a^2 = 2 / (2a + 1)``."""
    return 2.0 / (2.0 * np.arange(degree + 1) + 1.0)


class WGradBasis:
    """Orthogonal basis of ``[Q_{k-1,k}, Q_{k,k-1}]`` on a reference square.

    Component one uses ``P_a(xi) P_b(eta)`` with ``a < k``, ``b <= k``;
    component two swaps the roles.  Index ``s`` of component one maps to
    ``(a, b) = (s % k, s // k)``; component two maps ``s`` to
    ``(a, b) = (s % (k+1), s // (k+1))`` with ``a <= k``, ``b < k``.
    """

    def __init__(self, k: int):
        self.k = k
        self.ab1 = [(a, b) for b in range(k + 1) for a in range(k)]
        self.ab2 = [(a, b) for b in range(k) for a in range(k + 1)]

    @property
    def dim(self) -> int:
        return self.k * (self.k + 1)

    def reference_gram(self) -> tuple[np.ndarray, np.ndarray]:
        """Diagonals of the reference Gram matrices of both components."""
        nrm = legendre_norms(self.k)
        g1 = np.array([nrm[a] * nrm[b] for a, b in self.ab1])
        g2 = np.array([nrm[a] * nrm[b] for a, b in self.ab2])
        return g1, g2

    def values(self, xi, eta) -> tuple[np.ndarray, np.ndarray]:
        """Both components' basis values at reference points, ``(npts, dim)`` each."""
        Px = legendre_matrix(self.k, xi)
        Py = legendre_matrix(self.k, eta)
        v1 = np.column_stack([Px[:, a] * Py[:, b] for a, b in self.ab1])
        v2 = np.column_stack([Px[:, a] * Py[:, b] for a, b in self.ab2])
        return v1, v2
