"""Dense least squares for patch fits and the sparse SPD solve."""
from __future__ import annotations


import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla


RANK_TOL = 1e-10
EPS = np.finfo(float).eps


class RankDeficientError(np.linalg.LinAlgError):
    def __init__(self, message, patch=None):
        super().__init__(message)
        self.patch = patch


class SolverError(RuntimeError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


def least_squares(A, b) -> np.ndarray:
    """Minimiser of ``||A x - b||_2`` via QR of the column-scaled matrix."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.ndim != 2 or A.shape[0] < A.shape[1]:
        raise ValueError(f"need a tall matrix, got shape {A.shape}")
    x = least_squares_batch(A[None], b[None])
    return x[0]


def least_squares_batch(A, b) -> np.ndarray:
    """Stacked least squares: ``A`` is ``(P, n, m)``, ``b`` is ``(P, n)`` or ``(P, n, r)``.

    Raises :class:`RankDeficientError` with ``patch`` set to the first
    offending stack index.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    vec = b.ndim == 2
    if vec:
        b = b[..., None]
    scale = np.linalg.norm(A, axis=1)
    scale[scale == 0] = 1.0
    Q, R = np.linalg.qr(A / scale[:, None, :])
    d = np.abs(np.diagonal(R, axis1=1, axis2=2))
    bad = d.min(axis=1) < RANK_TOL * d.max(axis=1)
    if bad.any():
        p = int(np.flatnonzero(bad)[0])
        raise RankDeficientError(f"rank-deficient least-squares system (patch {p})", patch=p)
    y = np.linalg.solve(R, np.swapaxes(Q, 1, 2) @ b)
    x = y / scale[:, :, None]
    return x[..., 0] if vec else x


def solve_spd(M, b, rel_tol: float = 1e-12, method: str = "direct", maxiter=None) -> np.ndarray:
    """Solve ``M x = b`` for sparse SPD ``M`` with ``||Mx - b|| <= rel_tol ||b||``.

    The target is relaxed by the rounding floor ``8 eps || |M| |x| ||`` that no
    double-precision ``x`` can beat; for well-scaled systems it is negligible.

    ``method="direct"`` uses a sparse LU factorisation followed by a few
    steps of iterative refinement; ``method="cg"`` runs Jacobi-preconditioned
    conjugate gradients with a budget of ``50 * dim`` iterations.
    """
    M = sp.csr_matrix(M)
    b = np.asarray(b, dtype=float)
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros_like(b)
    absM = abs(M)

    def target(x):
        return rel_tol * bnorm + 8 * EPS * np.linalg.norm(absM @ np.abs(x))

    if method == "direct":
        lu = spla.splu(M.tocsc(), permc_spec="MMD_AT_PLUS_A")
        x = lu.solve(b)
        for _ in range(5):
            r = b - M @ x
            if np.linalg.norm(r) <= target(x):
                return x
            x = x + lu.solve(r)
        res = np.linalg.norm(b - M @ x)
    elif method == "cg":
        maxiter = maxiter or 50 * M.shape[0]
        dinv = 1.0 / M.diagonal()
        pre = spla.LinearOperator(M.shape, matvec=lambda v: dinv * v)
        x, _ = spla.cg(M, b, rtol=rel_tol, atol=0.0, maxiter=maxiter, M=pre)
        res = np.linalg.norm(b - M @ x)
    else:
        raise ValueError(f"unknown method {method!r}")
    if res <= target(x):
        return x
    raise SolverError(f"solver stalled at relative residual {res / bnorm:.3e}", residual=res / bnorm)
