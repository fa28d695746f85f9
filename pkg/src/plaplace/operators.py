"""Discrete operators: the monotone wide-stencil infinity Laplacian, the
five-point Laplacian, their combination for the game-theoretic p-Laplacian,
and the (non-monotone) centred-difference infinity Laplacian.

Every operator takes nodal values on the full ``(n, n)`` grid and returns the
``(n-2, n-2)`` array of values at interior nodes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import Grid2D, GridFunction
from .stencil import ArmTable, Stencil


def _values(u) -> np.ndarray:
    return u.values if isinstance(u, GridFunction) else np.asarray(u, dtype=float)


def p_weights(p) -> tuple[float, float]:
    """Return ``(alpha, beta) = (1/p, (p-2)/p)``; ``p`` may be ``inf``."""
    p = float(p)
    if not p >= 2:
        raise ValueError(f"p must lie in [2, inf], got {p}")
    if math.isinf(p):
        return 0.0, 1.0
    return 1.0 / p, (p - 2.0) / p


@dataclass
class OperatorEval:
    value: np.ndarray
    argmax: np.ndarray  # direction index of v+ per interior node
    argmin: np.ndarray  # direction index of v- per interior node


class InfinityLaplacian:
    """Wide-stencil discretisation of the normalised infinity Laplacian.

    With slopes ``s_k = (u(x + arm_k) - u(x)) / l_k`` the scheme is

        max_i min_j  2 (s_i + s_j) / (l_i + l_j)

    which equals ``max_k (u_k - u)/l_k**2 + min_k (u_k - u)/l_k**2`` whenever
    all arms have the same length (the 5-point stencil, for instance).  Each
    pair term is nondecreasing in the arm values and nonincreasing in u(x),
    so the max-min is elliptic.  Ranking arms by slope rather than by
    ``(u_k - u)/l_k**2`` keeps the selected pair aligned with the gradient on
    stencils mixing arm lengths; the squared-length ranking always prefers the
    shortest arms and loses consistency there (``form="squared"`` keeps it for
    comparison).

    Arms that would leave the domain are shortened to the boundary and read
    the Dirichlet data at the intersection point.
    """

    def __init__(self, grid: Grid2D, stencil: Stencil, dirichlet=None, form: str = "pairwise"):
        if form not in ("pairwise", "squared"):
            raise ValueError(f"unknown form {form!r}")
        self.grid = grid
        self.stencil = stencil
        self.form = form
        self.arms = ArmTable(grid, stencil, dirichlet)

    def _slopes(self, u: np.ndarray):
        uc = u[1:-1, 1:-1]
        ends = self.arms.endpoint_values(u)
        return [(e - uc) / L for e, L in zip(ends, self.arms.lengths)]

    def __call__(self, u) -> np.ndarray:
        u = _values(u)
        if self.form == "squared":
            q = [sk / L for sk, L in zip(self._slopes(u), self.arms.lengths)]
            return np.maximum.reduce(q) + np.minimum.reduce(q)
        uc = u[1:-1, 1:-1]
        d = [e - uc for e in self.arms.endpoint_values(u)]

        # Away from truncated arms every direction has its nominal length, and
        # the pair weight depends only on the two lengths: reduce within each
        # length group first, then take max-min over groups.
        h = self.grid.h
        norms = np.round(self.stencil.norms, 12)
        groups = np.unique(norms)
        scale = [1.0 / (gv * h) for gv in groups]
        smax = [np.maximum.reduce([dk for dk, c in zip(d, norms) if c == gv]) * sc
                for gv, sc in zip(groups, scale)]
        smin = [np.minimum.reduce([dk for dk, c in zip(d, norms) if c == gv]) * sc
                for gv, sc in zip(groups, scale)]
        out = None
        for a, la in enumerate(groups):
            inner = None
            for b, lb in enumerate(groups):
                term = (smax[a] + smin[b]) * (2.0 / ((la + lb) * h))
                inner = term if inner is None else np.minimum(inner, term, out=inner)
            out = inner if out is None else np.maximum(out, inner, out=out)

        if self.arms.any_truncated:
            band = self.arms.truncated_any
            L = np.stack([lk[band] for lk in self.arms.lengths])
            S = np.stack([dk[band] for dk in d]) / L
            out[band] = _pairwise(S, L)[0]
        return out

    def evaluate(self, u, chunk: int = 64) -> OperatorEval:
        """Value plus the selected arms, by brute force over all pairs.

        Ties go to the lowest direction index.  Slower than ``__call__``;
        meant for diagnostics and as a cross-check of the grouped evaluation.
        """
        u = _values(u)
        s = np.stack(self._slopes(u))
        L = np.stack(self.arms.lengths)
        k, m, _ = s.shape
        value = np.empty((m, m))
        amax = np.empty((m, m), dtype=int)
        amin = np.empty((m, m), dtype=int)
        for r0 in range(0, m, chunk):
            sl = slice(r0, min(m, r0 + chunk))
            S, Ln = s[:, sl], L[:, sl]
            if self.form == "squared":
                q = S / Ln
                ia, ib = q.argmax(axis=0), q.argmin(axis=0)
                v = np.take_along_axis(q, ia[None], 0)[0] + np.take_along_axis(q, ib[None], 0)[0]
            else:
                v, ia, ib = _pairwise(S, Ln)
            value[sl], amax[sl], amin[sl] = v, ia, ib
        return OperatorEval(value, amax, amin)


def _pairwise(S: np.ndarray, L: np.ndarray):
    """Max over i of min over j of ``2 (S_i + S_j) / (L_i + L_j)``.

    ``S`` and ``L`` have the direction index first.  Returns the value and the
    maximising (i, j); ties resolve to the lowest index.
    """
    G = 2.0 * (S[:, None] + S[None, :]) / (L[:, None] + L[None, :])
    jmin = G.argmin(axis=1)
    inner = np.take_along_axis(G, jmin[:, None], 1)[:, 0]
    ia = inner.argmax(axis=0)
    v = np.take_along_axis(inner, ia[None], 0)[0]
    ib = np.take_along_axis(jmin, ia[None], 0)[0]
    return v, ia, ib


def infinity_laplacian(u: GridFunction, stencil: Stencil, dirichlet_data=None,
                       form: str = "pairwise", return_arms: bool = False):
    op = InfinityLaplacian(u.grid, stencil, dirichlet_data, form=form)
    return op.evaluate(u) if return_arms else op(u)


def laplacian_5pt(u, dirichlet_data=None, h: float | None = None) -> np.ndarray:
    """Five-point Laplacian ``4 (ubar - u) / h**2``.

    Neighbours on the boundary are read from ``u`` itself; ``dirichlet_data``
    is accepted for signature symmetry with the wide-stencil operator.
    """
    if h is None:
        if not isinstance(u, GridFunction):
            raise TypeError("pass a GridFunction or give h explicitly")
        h = u.grid.h
    u = _values(u)
    return (u[2:, 1:-1] + u[:-2, 1:-1] + u[1:-1, 2:] + u[1:-1, :-2] - 4.0 * u[1:-1, 1:-1]) / h**2


class PLaplacian:
    """``alpha * Laplacian + beta * InfinityLaplacian`` with alpha = 1/p, beta = (p-2)/p."""

    def __init__(self, grid: Grid2D, stencil: Stencil, p, dirichlet=None, form: str = "pairwise"):
        self.grid = grid
        self.p = float(p)
        self.alpha, self.beta = p_weights(p)
        self.infinity = InfinityLaplacian(grid, stencil, dirichlet, form=form)

    def laplacian(self, u) -> np.ndarray:
        return laplacian_5pt(_values(u), h=self.grid.h)

    def __call__(self, u) -> np.ndarray:
        u = _values(u)
        out = np.zeros((self.grid.n - 2,) * 2)
        if self.alpha:
            out += self.alpha * self.laplacian(u)
        if self.beta:
            out += self.beta * self.infinity(u)
        return out


def p_laplacian(u: GridFunction, stencil: Stencil, p, dirichlet_data=None) -> np.ndarray:
    return PLaplacian(u.grid, stencil, p, dirichlet_data)(u)


def standard_fd_infinity_laplacian(u, h_reg: float | None = None, h: float | None = None) -> np.ndarray:
    """Centred differences for u_x, u_y, u_xx, u_yy, u_xy, with the gradient
    norm regularised to ``max(h_reg**2, |grad u|**2)`` (``h_reg`` defaults to h).

    Not monotone; kept to show how a consistent but non-monotone scheme can
    converge to the wrong function.
    """
    if h is None:
        h = u.grid.h
    if h_reg is None:
        h_reg = h
    u = _values(u)
    c = u[1:-1, 1:-1]
    e, w, n_, s = u[2:, 1:-1], u[:-2, 1:-1], u[1:-1, 2:], u[1:-1, :-2]
    ux = (e - w) / (2 * h)
    uy = (n_ - s) / (2 * h)
    uxx = (e - 2 * c + w) / h**2
    uyy = (n_ - 2 * c + s) / h**2
    uxy = (u[2:, 2:] + u[:-2, :-2] - u[:-2, 2:] - u[2:, :-2]) / (4 * h**2)
    num = ux * ux * uxx + 2 * ux * uy * uxy + uy * uy * uyy
    return num / np.maximum(h_reg**2, ux * ux + uy * uy)
