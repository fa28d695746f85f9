"""Exact solutions, the circle min+max oracle, and convergence-rate fits."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np


@dataclass(frozen=True)
class ExactSolution:
    name: str
    func: Callable
    p_values: str  # which p the function solves with g = 0
    g: float = 0.0
    note: str = ""

    def __call__(self, x, y):
        return self.func(x, y)


def _aronsson(x, y):
    return np.abs(x) ** (4.0 / 3.0) - np.abs(y) ** (4.0 / 3.0)


_EXACT = {
    "harmonic_saddle": ExactSolution("harmonic_saddle", lambda x, y: x * x - y * y, "2 and inf"),
    "aronsson": ExactSolution("aronsson", _aronsson, "inf",
                              note="solves Delta_inf u = 0 in the viscosity sense; smooth off the axes"),
    "cone_diff": ExactSolution("cone_diff", lambda x, y: np.abs(x) - np.abs(y), "inf",
                               note="not a solution; the fixed point of the centred-difference scheme"),
    "affine": ExactSolution("affine", lambda x, y: 3.0 * x + 2.0 * y, "all"),
}


def exact_solution(name: str) -> ExactSolution:
    try:
        return _EXACT[name]
    except KeyError:
        raise KeyError(f"unknown exact solution {name!r}; known: {sorted(_EXACT)}") from None


def cone_plus_linear(c: float) -> Callable:
    """Boundary data ``|x| - |y| + c (3x + 2y) / sqrt(14)``."""
    s = math.sqrt(14.0)
    return lambda x, y: np.abs(x) - np.abs(y) + c * (3.0 * x + 2.0 * y) / s


def boundary_function(spec: str) -> Callable:
    """Resolve ``name`` or ``name:key=value`` (only ``cone_plus_linear:c=...``)."""
    name, _, args = spec.partition(":")
    if name == "cone_plus_linear":
        kw = dict(a.split("=", 1) for a in args.split(",") if a)
        return cone_plus_linear(float(kw.get("c", 0.0)))
    return exact_solution(name).func


# ---------------------------------------------------------------------------
# pointwise derivatives and the circle oracle

def _derivatives(u: Callable, x, step: float = 1e-4):
    x0, y0 = map(float, x)
    s = step
    f = lambda a, b: float(u(x0 + a, y0 + b))
    c = f(0, 0)
    grad = np.array([(f(s, 0) - f(-s, 0)) / (2 * s), (f(0, s) - f(0, -s)) / (2 * s)])
    uxx = (f(s, 0) - 2 * c + f(-s, 0)) / s**2
    uyy = (f(0, s) - 2 * c + f(0, -s)) / s**2
    uxy = (f(s, s) + f(-s, -s) - f(-s, s) - f(s, -s)) / (4 * s**2)
    return grad, np.array([[uxx, uxy], [uxy, uyy]])


def normalized_operators(grad, hess) -> tuple[float, float]:
    """``(Delta_inf u, Delta_1 u)`` from the gradient and Hessian at a point."""
    grad = np.asarray(grad, float)
    hess = np.asarray(hess, float)
    pn = np.linalg.norm(grad)
    if pn < 1e-8:
        raise ValueError("gradient vanishes; the normalised operators are undefined")
    p = grad / pn
    perp = np.array([-p[1], p[0]])
    return float(p @ hess @ p), float(perp @ hess @ perp)


def lemma_coefficient(grad, hess) -> float:
    """``c = -(p_perp^T Q p_hat) / |p|``: the O(eps) rotation of the extremal circle points."""
    grad = np.asarray(grad, float)
    pn = np.linalg.norm(grad)
    p = grad / pn
    perp = np.array([-p[1], p[0]])
    return float(-(perp @ np.asarray(hess, float) @ p) / pn)


def correction_term(grad, hess, drop_inf: bool = False) -> float:
    """Leading O(eps**2) coefficient of the circle min+max.

    Expanding with the extremal points kept on the circle gives
    ``c**2 (Delta_1 u - Delta_inf u)``.  ``drop_inf=True`` returns
    ``c**2 Delta_1 u``, the value obtained when the unit-length constraint is
    ignored; the two agree where Delta_inf u = 0.
    """
    c = lemma_coefficient(grad, hess)
    dinf, d1 = normalized_operators(grad, hess)
    return c * c * (d1 if drop_inf else d1 - dinf)


def sphere_consistency_oracle(u: Callable, x, eps: float, m: int = 100_000,
                              grad=None, hess=None) -> tuple[float, float]:
    """Brute-force min + max of ``(u(y) - u(x)) / eps**2`` over ``m`` equally
    spaced points of the circle ``|y - x| = eps``.

    Returns ``(value, (value - Delta_inf u(x)) / eps**2)``.  The derivatives
    needed for Delta_inf default to central differences; pass ``grad`` and
    ``hess`` to avoid that.  Angular sampling error is O(eps / m**2) in the
    value, so ``m`` must be much larger than ``1 / eps``.
    """
    if m < 10_000:
        raise ValueError("use at least 10^4 circle samples")
    if grad is None or hess is None:
        g2, h2 = _derivatives(u, x)
        grad = g2 if grad is None else grad
        hess = h2 if hess is None else hess
    if np.linalg.norm(grad) < 1e-8:
        raise ValueError("gradient below 1e-8 at x")
    dinf, _ = normalized_operators(grad, hess)
    x0, y0 = map(float, x)
    th = 2.0 * np.pi * np.arange(m) / m
    vals = (u(x0 + eps * np.cos(th), y0 + eps * np.sin(th)) - u(x0, y0)) / eps**2
    value = float(vals.min() + vals.max())
    return value, (value - dinf) / eps**2


# ---------------------------------------------------------------------------
# rate fits

@dataclass
class RateFit:
    alpha: float
    mu: float  # log10 error drops by |mu| per iteration
    residual: float
    first: int  # iterations used, 1-based inclusive
    last: int
    floor: bool = False  # True when no exponential regime was found


def exponential_regime(errors: Sequence[float], floor_factor: float = 10.0) -> tuple[int, int]:
    """Indices ``[first, last)`` (0-based into ``errors``, entry k is after
    iteration k+1) of the geometric-decay window: iteration 1 is dropped and
    the window ends once the error first falls below ``floor_factor`` times
    the final value."""
    e = np.asarray(errors, float)
    if e.size < 2:
        return (1, 1)
    floor = e[-1]
    below = np.flatnonzero(e < floor_factor * floor)
    stop = int(below[0]) if below.size else e.size
    return 1, max(1, stop)


def fit_rate(report_or_errors, alpha: float, min_points: int = 5, floor_factor: float = 10.0) -> RateFit:
    """Least-squares slope of ``log10(error)`` against iteration count.

    Accepts a SolveReport (its error history is used) or a plain sequence.
    Raises ValueError when fewer than ``min_points`` iterations lie in the
    decaying regime; a one-step solve reports through ``floor=True`` instead
    when ``min_points`` is 0.
    """
    errors = getattr(report_or_errors, "error", report_or_errors)
    e = np.asarray(errors, float)
    lo, hi = exponential_regime(e, floor_factor)
    if hi - lo < max(min_points, 2):
        if min_points == 0:
            return RateFit(alpha, math.nan, math.nan, lo + 1, hi, floor=True)
        raise ValueError(f"only {max(hi - lo, 0)} iterations in the exponential regime (need {min_points})")
    n = np.arange(lo + 1, hi + 1, dtype=float)
    y = np.log10(e[lo:hi])
    A = np.vstack([n, np.ones_like(n)]).T
    coef, res, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.sqrt(res[0] / len(n))) if res.size else 0.0
    return RateFit(alpha, float(coef[0]), resid, lo + 1, hi)


def affine_fit(alphas, mus) -> tuple[float, float]:
    """Slope and intercept of ``mu = slope * alpha + intercept``."""
    slope, intercept = np.polyfit(np.asarray(alphas, float), np.asarray(mus, float), 1)
    return float(slope), float(intercept)
