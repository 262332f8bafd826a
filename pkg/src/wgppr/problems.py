"""Exact solutions used by the convergence studies."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

PI = np.pi


@dataclass(frozen=True)
class Problem:
    name: str
    f: Callable
    u: Callable
    grad_u: Callable
    note: str = ""


def sine_problem() -> Problem:
    def u(x, y):
        return np.sin(PI * x) * np.sin(PI * y)

    def f(x, y):
        return 2.0 * PI**2 * np.sin(PI * x) * np.sin(PI * y)

    def grad_u(x, y):
        return (PI * np.cos(PI * x) * np.sin(PI * y), PI * np.sin(PI * x) * np.cos(PI * y))

    return Problem("sine", f, u, grad_u, "smooth")


def _series(x, y, terms):
    """Truncated correction series and its gradient for the unit-load solution."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    s = np.zeros(np.broadcast(x, y).shape)
    sx = np.zeros_like(s)
    sy = np.zeros_like(s)
    for i in range(terms):
        a = (2 * i + 1) * PI
        c = 1.0 / ((2 * i + 1) ** 3 * (1.0 + np.exp(-a)))
        ey = np.exp(-a * y) + np.exp(-a * (1.0 - y))
        dey = -a * np.exp(-a * y) + a * np.exp(-a * (1.0 - y))
        ex = np.exp(-a * x) + np.exp(-a * (1.0 - x))
        dex = -a * np.exp(-a * x) + a * np.exp(-a * (1.0 - x))
        sinx, cosx = np.sin(a * x), np.cos(a * x)
        siny, cosy = np.sin(a * y), np.cos(a * y)
        s += c * (ey * sinx + ex * siny)
        sx += c * (ey * a * cosx + dex * siny)
        sy += c * (dey * sinx + ex * a * cosy)
    k = 2.0 / PI**3
    return k * s, k * sx, k * sy


def unit_load_problem(terms: int = 50) -> Problem:
    """``-Δu = 1`` with the closed-form leading part and a truncated sine series."""
    if terms < 1:
        raise ValueError("terms must be >= 1")

    def u(x, y):
        s, _, _ = _series(x, y, terms)
        return (x * (1 - x) + y * (1 - y)) / 4.0 - s

    def f(x, y):
        return np.ones(np.broadcast(np.asarray(x), np.asarray(y)).shape)

    def grad_u(x, y):
        _, sx, sy = _series(x, y, terms)
        return (1 - 2 * np.asarray(x)) / 4.0 - sx, (1 - 2 * np.asarray(y)) / 4.0 - sy

    return Problem("unit-load", f, u, grad_u, f"{terms}-term truncation; gradient of the same truncation")


PROBLEMS = {"sine": sine_problem, "unit-load": unit_load_problem}


def get_problem(name: str) -> Problem:
    try:
        return PROBLEMS[name]()
    except KeyError:
        raise ValueError(f"unknown problem {name!r}; choose from {sorted(PROBLEMS)}") from None
