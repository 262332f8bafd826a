"""Weak Galerkin finite elements for the 2-D Poisson problem on rectangular
tensor meshes, with polynomial preserving gradient recovery."""
from .errors import ConvergenceReport, LevelResult, observed_orders, recovered_gradient_error, supercloseness_error
from .interp import interpolate
from .mesh import TensorMesh, build_perturbed, build_uniform
from .ppr import recover
from .problems import get_problem, sine_problem, unit_load_problem
from .wg import WGSpace, energy_norm, solve_wg

__all__ = [
    "ConvergenceReport",
    "LevelResult",
    "TensorMesh",
    "WGSpace",
    "build_perturbed",
    "build_uniform",
    "energy_norm",
    "get_problem",
    "interpolate",
    "observed_orders",
    "recover",
    "recovered_gradient_error",
    "sine_problem",
    "solve_wg",
    "supercloseness_error",
    "unit_load_problem",
]
