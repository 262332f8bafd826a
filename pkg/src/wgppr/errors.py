"""Error norms and observed convergence orders."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .interp import interpolate
from .wg import WeakFunction, WGSpace, energy_norm


def supercloseness_error(space: WGSpace, u, u_h: WeakFunction) -> float:
    """``|||I_h u - u_h|||`` in the energy norm of the space."""
    return energy_norm(space, interpolate(space, u) - u_h)


def nodal_field_at_quadrature(space: WGSpace, values, n: int):
    """Continuous ``Q_k`` field given by nodal values, at element Gauss points."""
    x, y, W, xi, eta = space.element_quadrature(n)
    phi = space.interior_basis(xi, eta)
    return x, y, W, np.asarray(values)[space.mesh.element_nodes] @ phi.T


def recovered_gradient_error(space: WGSpace, grad_u, G, quad_points: int | None = None) -> float:
    """``||G - grad u||`` in L2 over the domain, ``G`` evaluated in the continuous basis."""
    n = quad_points or space.k + 5
    x, y, W, gx = nodal_field_at_quadrature(space, G.gx, n)
    _, _, _, gy = nodal_field_at_quadrature(space, G.gy, n)
    ux, uy = grad_u(x, y)
    err = ((gx - ux) ** 2 + (gy - uy) ** 2) * W
    return float(np.sqrt(err.sum(axis=1).sum()))


def broken_h1_seminorm(space: WGSpace, v: WeakFunction, grad_u=None, quad_points: int | None = None) -> float:
    """``(sum_T ||grad v0 - grad u||_T^2)^(1/2)``; ``grad_u`` defaults to zero."""
    n = quad_points or space.k + 5
    x, y, W, xi, eta = space.element_quadrature(n)
    dphx, dphy = space.interior_basis_grad(xi, eta)
    hx, hy = space.mesh.element_sizes.T
    c = v.interior
    vx = (c @ dphx.T) * (2.0 / hx)[:, None]
    vy = (c @ dphy.T) * (2.0 / hy)[:, None]
    if grad_u is not None:
        ux, uy = grad_u(x, y)
        vx, vy = vx - ux, vy - uy
    return float(np.sqrt((((vx**2 + vy**2) * W).sum(axis=1)).sum()))


def observed_orders(errors) -> list[float]:
    """``log2(e[i-1] / e[i])`` for consecutive levels; NaN where undefined."""
    out = []
    for prev, cur in zip(errors[:-1], errors[1:]):
        if prev > 0 and cur > 0:
            out.append(math.log2(prev / cur))
        else:
            out.append(math.nan)
    return out


@dataclass
class LevelResult:
    n: int
    h: float
    energy_err: float
    grad_err: float
    energy_order: float | None = None
    grad_order: float | None = None


@dataclass
class ConvergenceReport:
    problem: str
    k: int
    alpha: float
    mesh: str
    h_mode: str = "global"
    levels: list[LevelResult] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def add(self, level: LevelResult) -> None:
        if self.levels:
            prev = self.levels[-1]
            level.energy_order = observed_orders([prev.energy_err, level.energy_err])[0]
            level.grad_order = observed_orders([prev.grad_err, level.grad_err])[0]
        self.levels.append(level)

    @property
    def energy_errors(self) -> list[float]:
        return [lv.energy_err for lv in self.levels]

    @property
    def grad_errors(self) -> list[float]:
        return [lv.grad_err for lv in self.levels]
