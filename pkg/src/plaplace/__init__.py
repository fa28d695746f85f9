"""Monotone wide-stencil schemes and fast solvers for the normalised
infinity Laplacian and the game-theoretic p-Laplacian on rectangles."""
from .grid import Grid2D, GridFunction, make_grid, max_norm_diff, sample
from .operators import (InfinityLaplacian, PLaplacian, infinity_laplacian, laplacian_5pt,
                        p_laplacian, standard_fd_infinity_laplacian)
from .poisson import PoissonSolver
from .problem import Problem, residual
from .reference import exact_solution, fit_rate, sphere_consistency_oracle
from .solvers import (SolveReport, SolverConfig, cfl_step, contraction_rate_model, explicit_solve,
                      fixed_point_check, semi_implicit_solve)
from .stencil import Stencil, arms_at, build_stencil, directional_resolution

__version__ = "0.1.0"
