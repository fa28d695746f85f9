"""Uniform square-celled grids on a rectangle and scalar fields sampled on them.

Values are stored as an ``(n, n)`` array indexed ``[i, j]`` with ``i`` the
x-index and ``j`` the y-index, so node ``(i, j)`` sits at
``(xmin + i*h, ymin + j*h)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

# f(x, y) evaluated on arrays (or scalars) of coordinates.
BoundaryData = Callable[[np.ndarray, np.ndarray], np.ndarray]

CSV_VERSION = "gridfunction-v1"


@dataclass(frozen=True)
class Grid2D:
    xmin: float
    xmax: float
    ymin: float
    ymax: float
    n: int

    def __post_init__(self):
        if self.n < 3:
            raise ValueError(f"need at least 3 nodes per side, got n={self.n}")
        if not (self.xmax > self.xmin and self.ymax > self.ymin):
            raise ValueError("empty domain: require xmax > xmin and ymax > ymin")
        hx = (self.xmax - self.xmin) / (self.n - 1)
        hy = (self.ymax - self.ymin) / (self.n - 1)
        if not math.isclose(hx, hy, rel_tol=1e-12):
            raise ValueError(f"cells are not square: hx={hx!r}, hy={hy!r}")

    @property
    def h(self) -> float:
        return (self.xmax - self.xmin) / (self.n - 1)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n, self.n)

    @cached_property
    def x(self) -> np.ndarray:
        return self.xmin + self.h * np.arange(self.n)

    @cached_property
    def y(self) -> np.ndarray:
        return self.ymin + self.h * np.arange(self.n)

    @cached_property
    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.x, self.y, indexing="ij")

    @cached_property
    def boundary_mask(self) -> np.ndarray:
        mask = np.zeros(self.shape, dtype=bool)
        mask[0, :] = mask[-1, :] = mask[:, 0] = mask[:, -1] = True
        return mask

    @property
    def interior_mask(self) -> np.ndarray:
        return ~self.boundary_mask

    @property
    def num_interior(self) -> int:
        return (self.n - 2) ** 2

    def node(self, i: int, j: int) -> tuple[float, float]:
        return (self.xmin + i * self.h, self.ymin + j * self.h)

    def nearest_index(self, x: float, y: float) -> tuple[int, int]:
        i = int(round((x - self.xmin) / self.h))
        j = int(round((y - self.ymin) / self.h))
        return (min(max(i, 0), self.n - 1), min(max(j, 0), self.n - 1))

    def is_interior(self, i: int, j: int) -> bool:
        return 0 < i < self.n - 1 and 0 < j < self.n - 1

    def contains(self, x, y, atol: float = 0.0):
        return ((x >= self.xmin - atol) & (x <= self.xmax + atol)
                & (y >= self.ymin - atol) & (y <= self.ymax + atol))


def make_grid(bounds: Sequence[float], n: int) -> Grid2D:
    """Build a grid from ``bounds = (xmin, xmax, ymin, ymax)`` with ``n`` nodes per side."""
    xmin, xmax, ymin, ymax = (float(b) for b in bounds)
    return Grid2D(xmin, xmax, ymin, ymax, int(n))


@dataclass(frozen=True, eq=False)
class GridFunction:
    grid: Grid2D
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != self.grid.shape:
            raise ValueError(f"values have shape {values.shape}, grid expects {self.grid.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("grid function has non-finite values")
        object.__setattr__(self, "values", values)

    @property
    def interior(self) -> np.ndarray:
        return self.values[1:-1, 1:-1]

    def _check(self, other: GridFunction) -> None:
        if other.grid != self.grid:
            raise ValueError("grid functions live on different grids")

    def __add__(self, other):
        if isinstance(other, GridFunction):
            self._check(other)
            return GridFunction(self.grid, self.values + other.values)
        return GridFunction(self.grid, self.values + other)

    def __sub__(self, other):
        if isinstance(other, GridFunction):
            self._check(other)
            return GridFunction(self.grid, self.values - other.values)
        return GridFunction(self.grid, self.values - other)

    def __mul__(self, scalar: float):
        return GridFunction(self.grid, self.values * scalar)

    __rmul__ = __mul__
    __radd__ = __add__


def sample(f: Callable, grid: Grid2D) -> GridFunction:
    """Evaluate ``f(x, y)`` at every node.

    ``f`` is called once on the full coordinate arrays; scalar-only callables
    are handled through ``np.vectorize``.  Constants are accepted as well.
    """
    X, Y = grid.mesh
    if callable(f):
        try:
            vals = np.asarray(f(X, Y), dtype=float)
        except (TypeError, ValueError):
            vals = np.asarray(np.vectorize(f, otypes=[float])(X, Y))
        if vals.shape != grid.shape:
            vals = np.broadcast_to(vals, grid.shape)
    else:
        vals = np.full(grid.shape, float(f))
    vals = np.array(vals, dtype=float)
    bad = ~np.isfinite(vals)
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise ValueError(f"function is not finite at node ({i}, {j}) = {grid.node(i, j)}")
    return GridFunction(grid, vals)


def max_norm_diff(a: GridFunction, b: GridFunction, interior_only: bool = False) -> float:
    a._check(b)
    d = np.abs(a.values - b.values)
    if interior_only:
        d = d[1:-1, 1:-1]
    return float(d.max()) if d.size else 0.0


def with_boundary(u: np.ndarray, grid: Grid2D, dirichlet: BoundaryData) -> np.ndarray:
    """Return a copy of ``u`` whose boundary nodes hold the Dirichlet data."""
    out = np.array(u, dtype=float, copy=True)
    bvals = boundary_values(grid, dirichlet)
    out[grid.boundary_mask] = bvals[grid.boundary_mask]
    return out


def boundary_values(grid: Grid2D, dirichlet: BoundaryData) -> np.ndarray:
    """Full ``(n, n)`` array with Dirichlet data on the boundary and zeros inside."""
    X, Y = grid.mesh
    mask = grid.boundary_mask
    out = np.zeros(grid.shape)
    vals = np.broadcast_to(np.asarray(dirichlet(X[mask], Y[mask]), dtype=float), X[mask].shape)
    out[mask] = vals
    return out


def write_csv(u: GridFunction, path, comment: str | None = None) -> None:
    """Write one line per y-index; each line is the sweep over x."""
    g = u.grid
    lines = [f"# {CSV_VERSION}",
             f"# n={g.n} xmin={g.xmin!r} xmax={g.xmax!r} ymin={g.ymin!r} ymax={g.ymax!r} h={g.h!r}"]
    if comment:
        lines.append(f"# {comment}")
    for j in range(g.n):
        lines.append(",".join(repr(float(v)) for v in u.values[:, j]))
    Path(path).write_text("\n".join(lines) + "\n")


def read_csv(path) -> GridFunction:
    header = {}
    rows = []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            for tok in line[1:].split():
                if "=" in tok:
                    k, v = tok.split("=", 1)
                    header[k] = v
        elif line.strip():
            rows.append([float(t) for t in line.split(",")])
    try:
        grid = Grid2D(float(header["xmin"]), float(header["xmax"]),
                      float(header["ymin"]), float(header["ymax"]), int(header["n"]))
    except KeyError as exc:
        raise ValueError(f"{path}: missing header key {exc}") from None
    return GridFunction(grid, np.array(rows).T)
