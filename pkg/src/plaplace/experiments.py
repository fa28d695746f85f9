"""Numerical experiments: consistency study, failure of the centred scheme,
solver-speed sweeps and the convergence-rate fit over alpha = 1/p."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import GridFunction, boundary_values, make_grid, sample
from .operators import InfinityLaplacian, laplacian_5pt, standard_fd_infinity_laplacian
from .poisson import PoissonSolver
from .problem import Problem
from .reference import RateFit, affine_fit, exact_solution, fit_rate
from .solvers import SolverConfig, contraction_rate_model, solve
from .stencil import build_stencil

SQUARE = (-1.0, 1.0, -1.0, 1.0)


def consistency_study(u, exact_value: float, point, levels=(1, 2, 3),
                      hs=(1 / 32, 1 / 64, 1 / 128), half_width: int = 4, form: str = "pairwise"):
    """Error of the wide-stencil operator at ``point`` for each level and h.

    A small grid centred on ``point`` is built for every h; ``u`` supplies the
    nodal values and the boundary data.
    """
    x0, y0 = map(float, point)
    rows = []
    for level in levels:
        st = build_stencil(level)
        for h in hs:
            a = half_width * h
            g = make_grid((x0 - a, x0 + a, y0 - a, y0 + a), 2 * half_width + 1)
            op = InfinityLaplacian(g, st, u, form=form)
            val = float(op(sample(u, g))[half_width - 1, half_width - 1])
            rows.append(dict(level=level, h=h, dtheta=st.dtheta, value=val,
                             error=abs(val - exact_value)))
    return rows


@dataclass
class FailureDemo:
    field: GridFunction
    dist_cone: float        # max |u - (|x| - |y|)| on the central quarter
    dist_aronsson: float    # max |u - aronsson| on the central quarter
    cone_residual: float    # max |standard scheme(|x| - |y|)| at interior nodes
    iterations: int
    delta: float


def solve_standard_scheme(grid, dirichlet, tol: float = 1e-8, max_iters: int = 5000):
    """Fixed point of the centred-difference infinity Laplace equation.

    Same semi-implicit splitting as the monotone solver, with the centred
    operator in place of the wide-stencil one.
    """
    ps = PoissonSolver(grid)
    B = boundary_values(grid, dirichlet)
    h = grid.h
    u = ps.solve(np.zeros((grid.n - 2,) * 2), boundary=B).values
    d = math.inf
    k = 0
    for k in range(1, max_iters + 1):
        rhs = 2.0 * standard_fd_infinity_laplacian(u, h=h) - laplacian_5pt(u, h=h)
        new = ps.solve(rhs, boundary=B).values
        d = float(np.abs(new - u).max())
        u = new
        if d <= tol:
            break
    return GridFunction(grid, u), k, d


def failure_demo(n: int = 201, boundary: str = "aronsson", tol: float = 1e-8,
                 max_iters: int = 5000) -> FailureDemo:
    grid = make_grid(SQUARE, n)
    data = exact_solution(boundary)
    u, its, d = solve_standard_scheme(grid, data.func, tol, max_iters)
    X, Y = grid.mesh
    centre = (np.abs(X) <= 0.5) & (np.abs(Y) <= 0.5)
    cone = sample(exact_solution("cone_diff"), grid).values
    ar = sample(exact_solution("aronsson"), grid).values
    cone_res = float(np.abs(standard_fd_infinity_laplacian(cone, h=grid.h)).max())
    return FailureDemo(u, float(np.abs(u.values - cone)[centre].max()),
                       float(np.abs(u.values - ar)[centre].max()), cone_res, its, d)


def iteration_sweep(ns, methods=("explicit", "semi-implicit"), p=math.inf, boundary="aronsson",
                    level: int = 3, tol: float = 1e-6, max_iters: int = 1000,
                    init: str = "harmonic"):
    """Error-vs-iteration histories against the exact solution named ``boundary``."""
    data = exact_solution(boundary)
    out = {}
    for n in ns:
        grid = make_grid(SQUARE, n)
        problem = Problem(grid, p, data.func, level=level)
        exact = sample(data, grid)
        for method in methods:
            cfg = SolverConfig(method=method, tol=tol, max_iters=max_iters, init=init)
            out[(method, n)] = solve(problem, cfg, exact=exact)
    return out


def errors_to_limit(problem: Problem, tol: float = 1e-12, max_iters: int = 3000):
    """Semi-implicit error history measured against the iteration's own limit.

    The last iterate serves as the reference, so entry k is
    ``max |u^{k+1} - u^K|`` for k < K - 1.
    """
    iterates = []
    _, report = solve(problem, SolverConfig(tol=tol, max_iters=max_iters),
                      callback=lambda u: iterates.append(u.copy()))
    ref = iterates[-1]
    errs = [float(np.abs(u - ref).max()) for u in iterates[:-1]]
    return errs, report


def rate_sweep(alphas=None, n: int = 129, boundary: str = "aronsson", level: int = 3,
               tol: float = 1e-12, max_iters: int = 3000):
    """Fit ``log10(error) ~ mu N`` for each alpha, then ``mu`` affinely in alpha.

    Alphas whose solve finishes before an exponential regime appears (alpha =
    1/2 converges in a single step) come back with ``floor=True`` and are left
    out of the affine fit.
    """
    if alphas is None:
        alphas = [2.0 ** -k for k in range(1, 19)] + [0.0]
    grid = make_grid(SQUARE, n)
    data = exact_solution(boundary)
    fits: list[RateFit] = []
    histories = {}
    for a in alphas:
        problem = Problem.from_alpha(grid, a, data.func, level=level)
        errs, report = errors_to_limit(problem, tol, max_iters)
        histories[a] = (errs, report)
        try:
            fits.append(fit_rate(errs, a))
        except ValueError:
            fits.append(fit_rate(errs, a, min_points=0))
    good = [f for f in fits if not f.floor]
    slope, intercept = affine_fit([f.alpha for f in good], [f.mu for f in good])
    return fits, (slope, intercept), histories


def contraction_table(ns):
    return [(n, contraction_rate_model(n)) for n in ns]
