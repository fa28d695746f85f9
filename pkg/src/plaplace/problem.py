"""Dirichlet problem ``Delta_p u = g`` in the rectangle, ``u = dirichlet`` on its edge."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Union

import numpy as np

from .grid import Grid2D, GridFunction, boundary_values, sample
from .operators import PLaplacian, p_weights
from .stencil import Stencil, build_stencil

Source = Union[float, Callable]


@dataclass(eq=False)
class Problem:
    grid: Grid2D
    p: float
    dirichlet: Callable
    rhs: Source = 0.0
    level: int = 3
    form: str = "pairwise"
    name: str = field(default="", compare=False)

    def __post_init__(self):
        self.p = float(self.p)
        self.alpha, self.beta = p_weights(self.p)

    @classmethod
    def from_alpha(cls, grid, alpha: float, dirichlet, **kw) -> Problem:
        p = math.inf if alpha == 0 else 1.0 / alpha
        return cls(grid, p, dirichlet, **kw)

    @cached_property
    def stencil(self) -> Stencil:
        return build_stencil(self.level)

    @cached_property
    def operator(self) -> PLaplacian:
        return PLaplacian(self.grid, self.stencil, self.p, self.dirichlet, form=self.form)

    @cached_property
    def g(self) -> np.ndarray:
        """Right-hand side at interior nodes."""
        return sample(self.rhs, self.grid).interior.copy()

    @cached_property
    def boundary(self) -> np.ndarray:
        return boundary_values(self.grid, self.dirichlet)


def residual(u, problem: Problem, boundary_atol: float = 1e-8) -> np.ndarray:
    """``Delta_p u - g`` at interior nodes."""
    vals = u.values if isinstance(u, GridFunction) else np.asarray(u)
    mask = problem.grid.boundary_mask
    mismatch = np.abs(vals[mask] - problem.boundary[mask]).max()
    if mismatch > boundary_atol:
        warnings.warn(f"boundary values differ from Dirichlet data by {mismatch:.3e}", stacklevel=2)
    return problem.operator(vals) - problem.g
