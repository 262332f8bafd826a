"""Convergence sweeps from the command line.

Example::

    wgppr --problem sine --k 1 --alpha 1,2,3 --mesh uniform --levels 8,16,32,64,128
"""
from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConvergenceReport, LevelResult, recovered_gradient_error, supercloseness_error
from .linalg import SolverError
from .mesh import PERTURBED_BASES, TensorMesh, build_perturbed, build_uniform
from .ppr import WEIGHT_SCHEMES, recover
from .problems import PROBLEMS, get_problem
from .wg import H_MODES, WGSpace, solve_wg

MESH_FAMILIES = ("uniform", "perturbed")
FORMATS = ("csv", "md")
CSV_COLUMNS = ("N", "h", "energy_err", "energy_order", "grad_err", "grad_order")
_H_ALIASES = {"per-element": "element"}


class ConfigError(ValueError):
    """Invalid run configuration."""


class SweepError(RuntimeError):
    """A solve inside a sweep failed; ``alpha`` and ``n`` identify it."""

    def __init__(self, alpha, n, cause):
        super().__init__(f"solver failed at alpha={alpha:g}, N={n}: {cause}")
        self.alpha = alpha
        self.n = n


@dataclass(frozen=True)
class RunConfig:
    problem: str = "sine"
    k: int = 1
    alphas: tuple[float, ...] = (1.0, 2.0, 3.0)
    mesh: str = "uniform"
    levels: tuple[int, ...] = (8, 16, 32, 64, 128)
    h_mode: str = "element"
    weights: str = "auto"
    base: str = "labels"
    method: str = "direct"
    out: Path | None = None
    fmt: str = "md"
    dump_dir: Path | None = None

    def __post_init__(self):
        object.__setattr__(self, "h_mode", _H_ALIASES.get(self.h_mode, self.h_mode))
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        object.__setattr__(self, "levels", tuple(int(n) for n in self.levels))
        self.validate()

    def validate(self) -> None:
        if self.problem not in PROBLEMS:
            raise ConfigError(f"unknown problem {self.problem!r}; choose from {sorted(PROBLEMS)}")
        if self.k not in (1, 2, 3):
            raise ConfigError(f"k must be 1, 2 or 3, got {self.k}")
        if not self.alphas or any(not a >= 1 for a in self.alphas):
            raise ConfigError(f"every alpha must be >= 1, got {self.alphas}")
        if self.mesh not in MESH_FAMILIES:
            raise ConfigError(f"mesh must be one of {MESH_FAMILIES}, got {self.mesh!r}")
        if self.h_mode not in H_MODES:
            raise ConfigError(f"h-mode must be global or per-element, got {self.h_mode!r}")
        if self.weights not in WEIGHT_SCHEMES:
            raise ConfigError(f"weights must be one of {WEIGHT_SCHEMES}, got {self.weights!r}")
        if self.base not in PERTURBED_BASES:
            raise ConfigError(f"base must be one of {sorted(PERTURBED_BASES)}, got {self.base!r}")
        if self.method not in ("direct", "cg"):
            raise ConfigError(f"method must be direct or cg, got {self.method!r}")
        if self.fmt not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}, got {self.fmt!r}")
        if not self.levels:
            raise ConfigError("at least one level is required")
        coarsest = 2 if self.mesh == "uniform" else 4
        for n in self.levels:
            if n < coarsest or n & (n - 1):
                raise ConfigError(f"N must be a power of two >= {coarsest} for the {self.mesh} family, got {n}")
        for a, b in zip(self.levels[:-1], self.levels[1:]):
            if b != 2 * a:
                raise ConfigError(f"levels must double from one to the next, got {a} then {b}")

    def build_mesh(self, n: int) -> TensorMesh:
        if self.mesh == "uniform":
            return build_uniform(n, self.k)
        return build_perturbed(int(math.log2(n // 4)), self.k, base=self.base)


def run_convergence(config: RunConfig) -> list[ConvergenceReport]:
    """One report per alpha, levels in increasing N."""
    problem = get_problem(config.problem)
    reports = []
    for alpha in config.alphas:
        report = ConvergenceReport(config.problem, config.k, alpha, config.mesh, config.h_mode)
        report.meta.update(weights=config.weights, base=config.base if config.mesh == "perturbed" else None)
        if problem.note:
            report.meta["note"] = problem.note
        for n in config.levels:
            mesh = config.build_mesh(n)
            space = WGSpace(mesh, alpha, config.h_mode)
            try:
                u_h = solve_wg(space, problem.f, method=config.method)
            except SolverError as exc:
                raise SweepError(alpha, n, exc) from exc
            G = recover(space, u_h, config.weights)
            report.add(LevelResult(
                n=n,
                h=mesh.h,
                energy_err=supercloseness_error(space, problem.u, u_h),
                grad_err=recovered_gradient_error(space, problem.grad_u, G),
            ))
            if config.dump_dir is not None:
                _dump_level(config.dump_dir, mesh, alpha, n, u_h, G)
        reports.append(report)
    return reports


def _dump_level(root: Path, mesh, alpha, n, u_h, G) -> None:
    root.mkdir(parents=True, exist_ok=True)
    tag = f"a{alpha:g}_N{n}"
    _write(root / f"mesh_N{n}.txt", mesh.dump())
    _write(root / f"solution_{tag}.txt", u_h.dump())
    _write(root / f"gradient_{tag}.txt", G.dump())


def _write(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _err(v: float) -> str:
    return f"{v:.4e}"


def _order(v, blank: str) -> str:
    if v is None or not math.isfinite(v):
        return blank
    return f"{v:.4f}"


def _rows(report: ConvergenceReport, blank: str) -> list[list[str]]:
    return [
        [str(lv.n), _err(lv.h), _err(lv.energy_err), _order(lv.energy_order, blank),
         _err(lv.grad_err), _order(lv.grad_order, blank)]
        for lv in report.levels
    ]


def render_table(report: ConvergenceReport, fmt: str = "md") -> str:
    """Errors in 5-significant-digit scientific notation, orders with 4 decimals."""
    if fmt == "csv":
        lines = [",".join(CSV_COLUMNS)] + [",".join(r) for r in _rows(report, "")]
        return "\n".join(lines) + "\n"
    if fmt != "md":
        raise ValueError(f"unknown format {fmt!r}")
    title = f"### alpha = {report.alpha:g} (problem {report.problem}, k = {report.k}, {report.mesh} mesh, h {report.h_mode})"
    lines = [title, ""]
    if report.meta.get("note"):
        lines += [f"_{report.meta['note']}_", ""]
    lines += ["| N | h | energy error | order | gradient error | order |",
              "|---|---|---|---|---|---|"]
    lines += ["| " + " | ".join(r) + " |" for r in _rows(report, "--")]
    return "\n".join(lines) + "\n"


def render_reports(reports: list[ConvergenceReport], fmt: str = "md") -> str:
    """Several alphas in one document; CSV gains a leading ``alpha`` column."""
    if fmt == "md":
        return "\n".join(render_table(r, "md") for r in reports)
    lines = ["alpha," + ",".join(CSV_COLUMNS)]
    for r in reports:
        lines += [f"{r.alpha:g}," + ",".join(row) for row in _rows(r, "")]
    return "\n".join(lines) + "\n"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _csv_list(kind):
    def parse(text):
        try:
            return tuple(kind(t) for t in text.split(",") if t.strip())
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad list {text!r}") from None
    return parse


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="wgppr", description="Weak Galerkin convergence sweep with gradient recovery.")
    p.add_argument("--problem", default="sine", help=f"one of {', '.join(sorted(PROBLEMS))}")
    p.add_argument("--k", type=int, default=1, help="polynomial degree")
    p.add_argument("--alpha", type=_csv_list(float), default=(1.0, 2.0, 3.0), help="comma list of stabiliser exponents")
    p.add_argument("--mesh", default="uniform", choices=MESH_FAMILIES)
    p.add_argument("--levels", type=_csv_list(int), default=(8, 16, 32, 64, 128), help="comma list of N, each double the last")
    p.add_argument("--h-mode", default="per-element", choices=("global", "per-element"),
                   help="h in the stabiliser: global max diameter or each element's diameter")
    p.add_argument("--weights", default="auto", choices=WEIGHT_SCHEMES, help="nodal averaging before recovery")
    p.add_argument("--base", default="labels", choices=sorted(PERTURBED_BASES), help="initial perturbed partition")
    p.add_argument("--method", default="direct", choices=("direct", "cg"), help="linear solver")
    p.add_argument("--out", type=Path, default=None, help="output file (default stdout)")
    p.add_argument("--format", dest="fmt", default="md", choices=FORMATS)
    p.add_argument("--dump-dir", type=Path, default=None, help="write mesh, solution and gradient dumps per level")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = RunConfig(
            problem=args.problem, k=args.k, alphas=args.alpha, mesh=args.mesh, levels=args.levels,
            h_mode=args.h_mode, weights=args.weights, base=args.base, method=args.method,
            out=args.out, fmt=args.fmt, dump_dir=args.dump_dir,
        )
    except ConfigError as exc:
        print(f"wgppr: config error: {exc}", file=sys.stderr)
        return 1
    try:
        reports = run_convergence(config)
    except SweepError as exc:
        print(f"wgppr: {exc}", file=sys.stderr)
        return 2
    text = render_reports(reports, config.fmt)
    if config.out is None:
        sys.stdout.write(text)
    else:
        _write(config.out, text)
    return 0
