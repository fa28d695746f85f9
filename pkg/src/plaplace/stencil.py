"""Symmetric wide stencils (5, 9 and 17 point) and boundary-truncated arms."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .grid import Grid2D

_RINGS = {
    1: [(1, 0), (0, 1), (-1, 0), (0, -1)],
    2: [(1, 1), (-1, 1), (-1, -1), (1, -1)],
    3: [(2, 1), (1, 2), (-1, 2), (-2, 1), (-2, -1), (-1, -2), (1, -2), (2, -1)],
}

# CLI names: number of points including the centre.
POINTS_TO_LEVEL = {5: 1, 9: 2, 17: 3}


@dataclass(frozen=True)
class Stencil:
    level: int
    directions: np.ndarray  # (k, 2) integer offsets in grid-index units

    @cached_property
    def norms(self) -> np.ndarray:
        return np.hypot(self.directions[:, 0], self.directions[:, 1])

    @cached_property
    def unit_directions(self) -> np.ndarray:
        return self.directions / self.norms[:, None]

    @property
    def size(self) -> int:
        return len(self.directions)

    @property
    def points(self) -> int:
        return self.size + 1

    def h_max(self, h: float) -> float:
        """Longest arm length for grid spacing ``h``."""
        return float(self.norms.max() * h)

    @cached_property
    def dtheta(self) -> float:
        return directional_resolution(self)

    def index_of(self, v) -> int:
        hits = np.flatnonzero((self.directions == np.asarray(v)).all(axis=1))
        if not hits.size:
            raise KeyError(f"direction {tuple(v)} not in stencil")
        return int(hits[0])


def build_stencil(level: int) -> Stencil:
    if level not in _RINGS:
        raise ValueError(f"unsupported stencil level {level}; use 1, 2 or 3")
    dirs = [v for k in range(1, level + 1) for v in _RINGS[k]]
    return Stencil(level, np.array(dirs, dtype=int))


def stencil_from_points(points: int) -> Stencil:
    try:
        return build_stencil(POINTS_TO_LEVEL[int(points)])
    except KeyError:
        raise ValueError(f"stencil must be one of 5, 9, 17 points, got {points}") from None


def directional_resolution(stencil: Stencil) -> float:
    """Largest chord distance from a unit vector to the nearest stencil direction.

    The worst unit vector bisects the widest angular gap between neighbouring
    directions, so the answer is ``2 sin(gap / 4)``.
    """
    if stencil.size == 0:
        raise ValueError("empty stencil")
    ang = np.sort(np.arctan2(stencil.directions[:, 1], stencil.directions[:, 0]))
    gaps = np.diff(np.append(ang, ang[0] + 2 * np.pi))
    return float(2 * math.sin(gaps.max() / 4))


@dataclass(frozen=True)
class Arm:
    direction: tuple[int, int]
    offset: tuple[float, float]  # real units
    endpoint: tuple[float, float]
    on_grid: bool  # False: truncated, endpoint is a boundary point between nodes
    length: float


def _truncation(grid: Grid2D, i, j, v) -> np.ndarray | float:
    """Largest t in (0, 1] keeping (i, j) + t*v inside the closed index box."""
    last = grid.n - 1
    t = np.ones(np.broadcast(i, j).shape) if np.ndim(i) else 1.0
    for idx, c in ((i, v[0]), (j, v[1])):
        if c > 0:
            t = np.minimum(t, (last - idx) / c)
        elif c < 0:
            t = np.minimum(t, idx / -c)
    return t


def arms_at(grid: Grid2D, stencil: Stencil, node: tuple[int, int]) -> list[Arm]:
    i, j = node
    if not grid.is_interior(i, j):
        raise ValueError(f"node {node} is not interior")
    h = grid.h
    x0, y0 = grid.node(i, j)
    arms = []
    for v, norm in zip(stencil.directions, stencil.norms):
        t = float(_truncation(grid, i, j, v))
        off = (t * v[0] * h, t * v[1] * h)
        arms.append(Arm(direction=(int(v[0]), int(v[1])), offset=off,
                        endpoint=(x0 + off[0], y0 + off[1]),
                        on_grid=(t == 1.0), length=t * norm * h))
    return arms


class ArmTable:
    """Per-direction arm data for every interior node, vectorised.

    ``lengths[k]`` is the ``(n-2, n-2)`` array of arm lengths in direction k;
    ``truncated[k]`` marks arms cut short by the boundary and
    ``boundary_values[k]`` holds the Dirichlet data at their endpoints
    (zero elsewhere).
    """

    def __init__(self, grid: Grid2D, stencil: Stencil, dirichlet=None):
        self.grid = grid
        self.stencil = stencil
        n, h = grid.n, grid.h
        I, J = np.meshgrid(np.arange(1, n - 1), np.arange(1, n - 1), indexing="ij")
        self.lengths = []
        self.truncated = []
        self.boundary_values = []
        for v, norm in zip(stencil.directions, stencil.norms):
            t = _truncation(grid, I, J, v)
            trunc = t < 1.0
            self.lengths.append(t * norm * h)
            self.truncated.append(trunc)
            bv = np.zeros(I.shape)
            if trunc.any():
                if dirichlet is None:
                    raise ValueError("stencil arms leave the grid; Dirichlet data is required")
                ex = grid.xmin + (I[trunc] + t[trunc] * v[0]) * h
                ey = grid.ymin + (J[trunc] + t[trunc] * v[1]) * h
                bv[trunc] = np.broadcast_to(np.asarray(dirichlet(ex, ey), dtype=float), ex.shape)
            self.boundary_values.append(bv)
        self.truncated_any = np.logical_or.reduce(self.truncated)
        self.any_truncated = bool(self.truncated_any.any())

    def endpoint_values(self, u: np.ndarray) -> list[np.ndarray]:
        """Values of ``u`` (full ``(n, n)`` array) at every arm endpoint."""
        n = self.grid.n
        pad = int(np.abs(self.stencil.directions).max())
        up = np.pad(u, pad, mode="edge") if pad > 1 else u
        off = pad if pad > 1 else 0
        out = []
        for (di, dj), trunc, bv in zip(self.stencil.directions, self.truncated, self.boundary_values):
            ends = up[off + 1 + di: off + n - 1 + di, off + 1 + dj: off + n - 1 + dj]
            out.append(np.where(trunc, bv, ends) if trunc.any() else ends)
        return out
