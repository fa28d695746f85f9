"""Acceptance criteria, one test (and one PASS/FAIL line) each.

Tolerances are the ones stated for each criterion; none is relaxed here.
All runs use the 17-point stencil on [-1, 1]^2.
"""
import math

import numpy as np
import pytest

from plaplace import (InfinityLaplacian, PLaplacian, PoissonSolver, Problem, SolverConfig,
                      build_stencil, contraction_rate_model, fixed_point_check, make_grid, sample,
                      semi_implicit_solve, standard_fd_infinity_laplacian)
from plaplace import experiments
from plaplace.reference import correction_term, exact_solution, lemma_coefficient, normalized_operators
from plaplace.reference import sphere_consistency_oracle
from plaplace.solvers import explicit_solve

SQUARE = experiments.SQUARE
ARONSSON = exact_solution("aronsson")
LEVEL = 3


def test_c1_consistency_order(verdict):
    x0, y0 = 0.5, 0.25
    exact = 2 * (1 + y0) * x0 / ((1 + y0) ** 2 + x0**2)
    rows = experiments.consistency_study(lambda x, y: x + x * y, exact, (x0, y0), levels=(1, 3))
    e1 = [r["error"] for r in rows if r["level"] == 1]
    e3 = [r["error"] for r in rows if r["level"] == 3]
    nonincreasing = all(b <= a * (1 + 1e-9) + 1e-12 for a, b in zip(e3, e3[1:]))
    ok = nonincreasing and e3[-1] < e1[-1]
    verdict("C1 consistency", ok,
            f"level-3 errors {['%.4g' % e for e in e3]} plateau {e3[-1]:.4g} < level-1 plateau {e1[-1]:.4g}")


def test_c2_circle_oracle(verdict):
    u = lambda x, y: x + x * y  # noqa: E731
    grad, hess = [1.0, 0.0], [[0.0, 1.0], [1.0, 0.0]]
    c = lemma_coefficient(grad, hess)
    _, d1 = normalized_operators(grad, hess)
    target = c * c * d1
    _, est = sphere_consistency_oracle(u, (0.0, 0.0), 0.02, m=100_000, grad=grad, hess=hess)
    ok = c == -1.0 and abs(est - target) <= 0.1 * abs(target) + 1e-9
    # companion with a non-zero target (Delta_1 u = 2, Delta_inf u = 0)
    u2 = lambda x, y: x + x * y + y * y  # noqa: E731
    h2 = [[0.0, 1.0], [1.0, 2.0]]
    t2 = correction_term(grad, h2)
    _, est2 = sphere_consistency_oracle(u2, (0.0, 0.0), 0.02, m=100_000, grad=grad, hess=h2)
    ok = ok and abs(est2 - t2) <= 0.1 * abs(t2)
    verdict("C2 circle oracle", ok,
            f"c={c:g}, estimate {est:.3g} vs c^2 Delta_1 u = {target:g}; x+xy+y^2: {est2:.5f} vs {t2:g}")


def test_c3_monotonicity_fuzz(verdict):
    rng = np.random.default_rng(2024)
    bdata = lambda x, y: np.sin(3 * x) - y * y  # noqa: E731
    grids = [make_grid((0, 1, 0, 1), n) for n in (5, 8)]
    ops = {}
    for gi, g in enumerate(grids):
        for level in (1, 2, 3):
            st = build_stencil(level)
            ops[(gi, level, "inf-op")] = (g, st, InfinityLaplacian(g, st, bdata))
            for p in (2.0, 3.0, 6.0, math.inf):
                ops[(gi, level, p)] = (g, st, PLaplacian(g, st, p, bdata))
    keys = list(ops)
    trials, violations = 10_000, 0
    for _ in range(trials):
        g, st, op = ops[keys[rng.integers(len(keys))]]
        u = rng.standard_normal(g.shape) * rng.choice([1e-3, 1.0, 1e3])
        i, j = rng.integers(1, g.n - 1, size=2)
        delta = 10.0 ** rng.uniform(-8, 1)
        base = op(u)[i - 1, j - 1]
        tol = 1e-12 * (np.abs(u).max() / g.h**2 + 1)
        v = u.copy()
        if rng.random() < 0.5:
            v[i, j] += delta
            violations += op(v)[i - 1, j - 1] > base + tol
        else:
            a, b = st.directions[rng.integers(st.size)]
            if 0 <= i + a < g.n and 0 <= j + b < g.n:
                v[i + a, j + b] += delta
                violations += op(v)[i - 1, j - 1] < base - tol
    verdict("C3 monotonicity fuzz", violations == 0,
            f"{trials} trials over levels 1-3, p in {{2,3,6,inf}}: {violations} violations")


def test_c4_failure_demo(verdict):
    # (a) on grids with dyadic spacing, where the samples are exact; at
    # n = 201 the spacing 0.01 is inexact and rounding alone gives ~2e-12
    res = {}
    for n in (129, 257, 201):
        cone = sample(exact_solution("cone_diff"), make_grid(SQUARE, n))
        res[n] = float(np.abs(standard_fd_infinity_laplacian(cone)).max())
    demo = experiments.failure_demo(201, "aronsson", tol=1e-7, max_iters=5000)
    ok = max(res[129], res[257]) <= 1e-12 and demo.dist_cone < demo.dist_aronsson
    verdict("C4 failure demo", ok,
            f"(a) cone residual {res[129]:.1e} (n=129), {res[257]:.1e} (n=257), {res[201]:.1e} (n=201); "
            f"(b) central quarter: to |x|-|y| {demo.dist_cone:.4f}, "
            f"to aronsson {demo.dist_aronsson:.4f} ({demo.iterations} its, change {demo.delta:.1e})")


def test_c5_explicit_slowness(verdict):
    runs = experiments.iteration_sweep([65, 513], methods=("explicit",), level=LEVEL,
                                       tol=1e-14, max_iters=1000, init="zero")
    e65 = runs[("explicit", 65)][1].error
    e513 = runs[("explicit", 513)][1].error
    a, b, c = e65[199], e65[999], e513[999]
    ok = a <= 0.15 and b <= 0.005 and c >= 0.3
    verdict("C5 explicit slowness", ok,
            f"n=65: {a:.4f} at 200 (<=0.15), {b:.4f} at 1000 (<=0.005); n=513: {c:.4f} at 1000 (>=0.3)")


def test_c6_semi_implicit_speed(verdict):
    first, counts = {}, {}
    for n in (65, 129, 257, 513):
        g = make_grid(SQUARE, n)
        pr = Problem(g, math.inf, ARONSSON.func, level=LEVEL)
        _, rep = semi_implicit_solve(pr, SolverConfig(tol=1e-4, max_iters=500), exact=sample(ARONSSON, g))
        first[n] = rep.error[0]
        counts[n] = rep.iterations if rep.converged else math.inf
    ratio = max(counts.values()) / min(counts.values())
    ok = max(first.values()) <= 0.15 and ratio <= 2
    verdict("C6 semi-implicit speed", ok,
            f"error after 1 iteration {', '.join(f'{v:.4f}' for v in first.values())} (<=0.15); "
            f"iterations to change<=1e-4 {list(counts.values())}, ratio {ratio:.2f} (<=2)")


def test_c7_p2_one_step(verdict):
    g = make_grid(SQUARE, 129)
    pr = Problem(g, 2, ARONSSON.func, level=LEVEL)
    u, rep = semi_implicit_solve(pr, SolverConfig(tol=1e-10), u0=np.zeros(g.shape))
    harmonic = PoissonSolver(g).solve(np.zeros((g.n - 2, g.n - 2)), ARONSSON.func)
    res = fixed_point_check(u, pr)
    diff = float(np.abs(u.values - harmonic.values).max())
    ok = rep.converged and rep.iterations == 1 and res <= 1e-8 and diff <= 1e-12
    verdict("C7 p=2 one step", ok,
            f"{rep.iterations} iteration(s), residual {res:.2e}, distance to harmonic solve {diff:.1e}")


def test_c8_rate_fit(verdict):
    fits, (slope, intercept), _ = experiments.rate_sweep(n=129, level=LEVEL)
    ok = -1.15 <= slope <= -0.6 and -0.03 <= intercept <= 0.0
    used = sum(not f.floor for f in fits)
    verdict("C8 rate fit", ok,
            f"mu(alpha) = {slope:.4f} alpha + {intercept:.5f} over {used} alphas "
            f"(slope in [-1.15,-0.6], intercept in [-0.03,0])")


def test_c9_contraction_model(verdict):
    rates = [contraction_rate_model(n) for n in range(3, 1026)]
    r4 = contraction_rate_model(4)
    ok = max(rates) < 1 and r4 == pytest.approx(0.5, abs=1e-12)
    verdict("C9 contraction model", ok, f"max over n<=1025 {max(rates):.9f} (<1), n=4 {r4:.12f}")


def test_c10_cross_validation(verdict):
    tol = 1e-7
    g = make_grid(SQUARE, 129)
    pr = Problem(g, 6, ARONSSON.func, level=LEVEL)
    ue, re = explicit_solve(pr, SolverConfig(method="explicit", tol=tol, max_iters=50_000, stop="estimate"))
    us, rs = semi_implicit_solve(pr, SolverConfig(tol=tol, max_iters=1000, stop="estimate"))
    diff = float(np.abs(ue.values - us.values).max())
    ok = re.converged and rs.converged and diff <= 10 * tol
    verdict("C10 solver cross-validation", ok,
            f"max |explicit - semi-implicit| = {diff:.2e} (<= {10 * tol:.0e}); "
            f"{re.iterations} explicit vs {rs.iterations} semi-implicit iterations")
