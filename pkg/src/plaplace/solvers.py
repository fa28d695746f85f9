"""Explicit (forward Euler in artificial time) and semi-implicit solvers."""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .grid import Grid2D, GridFunction
from .operators import laplacian_5pt, p_weights
from .poisson import PoissonSolver
from .problem import Problem, residual
from .stencil import Stencil

log = logging.getLogger(__name__)

REPORT_VERSION = "solvereport-v1"


@dataclass
class SolverConfig:
    method: str = "semi-implicit"
    tol: float = 1e-6
    max_iters: int = 1000
    rho: Optional[float] = None  # explicit step; default is the CFL bound
    divergence_factor: float = 10.0
    init: str = "harmonic"  # or "zero": interior zero, boundary from the data
    # "change": stop on max |u^{k+1} - u^k| <= tol.  "estimate": stop once
    # change * q / (1 - q) <= tol, q the observed contraction ratio, i.e. on
    # an estimate of the distance to the fixed point.
    stop: str = "change"

    def __post_init__(self):
        if self.method not in ("explicit", "semi-implicit"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.init not in ("harmonic", "zero"):
            raise ValueError(f"unknown init {self.init!r}")
        if self.stop not in ("change", "estimate"):
            raise ValueError(f"unknown stopping rule {self.stop!r}")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")


@dataclass
class SolveReport:
    method: str
    delta: list = field(default_factory=list)     # max |u^{k+1} - u^k|
    residual: list = field(default_factory=list)  # max |Delta_p u^{k+1} - g|
    error: list = field(default_factory=list)     # max |u^{k+1} - exact|, if given
    initial_error: Optional[float] = None
    status: str = "running"
    rho: Optional[float] = None

    @property
    def iterations(self) -> int:
        return len(self.delta)

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(f"# {REPORT_VERSION} method={self.method} status={self.status}\n")
            w = csv.writer(fh)
            cols = ["iter", "delta_max", "residual_max"] + (["error_max"] if self.error else [])
            w.writerow(cols)
            if self.initial_error is not None:
                w.writerow([0, "", ""] + [repr(self.initial_error)])
            for k in range(self.iterations):
                row = [k + 1, repr(self.delta[k]), repr(self.residual[k])]
                if self.error:
                    row.append(repr(self.error[k]))
                w.writerow(row)


def cfl_step(p, stencil: Stencil, grid: Grid2D) -> float:
    """Inverse of the largest centre coefficient of the discrete p-Laplacian.

    The wide-stencil term contributes at most ``2 / h_min**2`` (h_min, the
    shortest arm, is h because the axis arms are always present and never
    truncated) and the five-point Laplacian ``4 / h**2``.
    """
    alpha, beta = p_weights(p)
    h = grid.h
    hmin = float(stencil.norms.min()) * h
    return 1.0 / (4.0 * alpha / h**2 + 2.0 * beta / hmin**2)


def initial_guess(problem: Problem, poisson: Optional[PoissonSolver] = None) -> np.ndarray:
    """Solution of the p = 2 problem ``Lap_h u = 2 g`` with the same boundary data."""
    poisson = poisson or PoissonSolver(problem.grid)
    return poisson.solve(-2.0 * problem.g, boundary=problem.boundary).values


def _start(problem: Problem, config: SolverConfig, u0, poisson=None) -> np.ndarray:
    grid = problem.grid
    if u0 is not None:
        u = np.array(getattr(u0, "values", u0), dtype=float)
    elif config.init == "zero":
        u = np.zeros(grid.shape)
    else:
        u = initial_guess(problem, poisson)
    u[grid.boundary_mask] = problem.boundary[grid.boundary_mask]
    return u


def _done(delta: list, config: SolverConfig, window: int = 5) -> bool:
    d = delta[-1]
    if d > config.tol:
        return False
    if config.stop == "change" or d == 0.0:
        return True
    if len(delta) <= window:
        return False
    q = max(b / a for a, b in zip(delta[-window - 1:-1], delta[-window:]) if a > 0)
    return q < 1 and d * q / (1 - q) <= config.tol


def _finish(report: SolveReport, u: np.ndarray, grid: Grid2D):
    log.info("%s: %s after %d iterations", report.method, report.status, report.iterations)
    return GridFunction(grid, u), report


def _error(u, exact):
    return float(np.abs(u - exact).max())


def explicit_solve(problem: Problem, config: SolverConfig | None = None, exact=None, u0=None,
                   callback=None):
    """Iterate ``u <- u + rho (Delta_p u - g)`` with the boundary held fixed.

    Stops when the max-norm change between iterates falls to ``config.tol``
    (see ``SolverConfig.stop``).  ``exact`` (GridFunction or array) enables
    the error history; ``callback(u)`` sees every iterate.
    """
    config = config or SolverConfig(method="explicit")
    grid = problem.grid
    bound = cfl_step(problem.p, problem.stencil, grid)
    rho = bound if config.rho is None else config.rho
    if rho > bound * (1 + 1e-12):
        raise ValueError(f"step {rho:.4e} exceeds the monotonicity bound {bound:.4e}")
    exact = None if exact is None else getattr(exact, "values", exact)

    u = _start(problem, config, u0)
    report = SolveReport("explicit", rho=rho)
    if exact is not None:
        report.initial_error = _error(u, exact)
    op, g = problem.operator, problem.g
    for _ in range(config.max_iters):
        r = op(u) - g
        step = rho * r
        u[1:-1, 1:-1] += step
        report.delta.append(float(np.abs(step).max()))
        # residual of the iterate the step was computed from
        report.residual.append(float(np.abs(r).max()))
        if exact is not None:
            report.error.append(_error(u, exact))
        if callback is not None:
            callback(u)
        if _done(report.delta, config):
            report.status = "converged"
            return _finish(report, u, grid)
    report.status = "max_iters"
    return _finish(report, u, grid)


def semi_implicit_solve(problem: Problem, config: SolverConfig | None = None, exact=None,
                        u0=None, poisson: Optional[PoissonSolver] = None, callback=None):
    """Iterate ``-Lap_h u^{k+1} = beta (2 Dinf_h u^k - Lap_h u^k) - 2 g``.

    Here ``beta = 1 - 2/p`` and ``Delta_1 = Lap - Delta_inf`` is used so only
    the infinity Laplacian is discretised.  Fixed points satisfy
    ``alpha Lap_h u + beta Dinf_h u = g``.  The iteration is not known to be
    a contraction, so it stops with status ``"diverged"`` once the change
    grows past ``divergence_factor`` times its smallest value so far.

    For p = 2 the right-hand side no longer depends on the iterate and the
    first solve is reported as converged whatever its distance from ``u0``.
    """
    config = config or SolverConfig()
    grid = problem.grid
    poisson = poisson or PoissonSolver(grid)
    exact = None if exact is None else getattr(exact, "values", exact)
    beta = problem.beta
    h = grid.h
    dinf = problem.operator.infinity
    boundary = problem.boundary

    u = _start(problem, config, u0, poisson)
    report = SolveReport("semi-implicit")
    if exact is not None:
        report.initial_error = _error(u, exact)
    g = problem.g
    best = math.inf
    for _ in range(config.max_iters):
        lap = laplacian_5pt(u, h=h)
        rhs = -2.0 * g
        if beta:
            di = dinf(u)
            rhs = rhs + beta * (2.0 * di - lap)
            report.residual.append(float(np.abs(problem.alpha * lap + beta * di - g).max()))
        else:
            report.residual.append(float(np.abs(problem.alpha * lap - g).max()))
        new = poisson.solve(rhs, boundary=boundary).values
        d = float(np.abs(new - u).max())
        u = new
        report.delta.append(d)
        if exact is not None:
            report.error.append(_error(u, exact))
        if callback is not None:
            callback(u)
        # with beta = 0 the update ignores u^k, so one step lands on the fixed point
        if not beta or _done(report.delta, config):
            report.status = "converged"
            return _finish(report, u, grid)
        best = min(best, d)
        if d > config.divergence_factor * best:
            report.status = "diverged"
            return _finish(report, u, grid)
    report.status = "max_iters"
    return _finish(report, u, grid)


def solve(problem: Problem, config: SolverConfig | None = None, **kw):
    config = config or SolverConfig()
    if config.method == "explicit":
        return explicit_solve(problem, config, **kw)
    return semi_implicit_solve(problem, config, **kw)


def fixed_point_check(u, problem: Problem) -> float:
    """Max-norm residual of the discrete equation at ``u``."""
    return float(np.abs(residual(u, problem)).max())


def contraction_rate_model(n: int) -> float:
    """Contraction factor of ``(M + N)^{-1} (M - N)`` with M, N the 1D
    second-difference operators in x and y on an n-node grid.

    Only the extreme eigenvalues matter: ``max |mu_i - mu_j| / (mu_i + mu_j)``
    is attained at the smallest and largest.
    """
    if n < 3:
        raise ValueError("need n >= 3")
    m = n - 2
    k = np.arange(1, m + 1)
    mu = 2.0 - 2.0 * np.cos(k * np.pi / (n - 1))  # h**2 cancels in the ratio
    lo, hi = mu.min(), mu.max()
    return float((hi - lo) / (hi + lo))
