import time

import numpy as np
import pytest

from plaplace import PoissonSolver, laplacian_5pt, make_grid, sample
from plaplace.poisson import prepare, solve


def test_affine_boundary_gives_affine(square):
    g = square(17)
    f = lambda x, y: 3 * x + 2 * y  # noqa: E731
    w = PoissonSolver(g).solve(np.zeros((15, 15)), f)
    assert np.abs(w.values - sample(f, g).values).max() < 1e-12


@pytest.mark.parametrize("f,rhs", [(lambda x, y: x * x + y * y, -4.0), (lambda x, y: x * x - y * y, 0.0)])
def test_quadratic_exactness(square, f, rhs):
    g = square(33)
    w = solve(prepare(g), np.full((31, 31), rhs), f)
    assert np.abs(w.values - sample(f, g).values).max() < 1e-11


def test_single_interior_node():
    g = make_grid((0, 1, 0, 1), 3)
    w = PoissonSolver(g).solve(np.array([[8.0]]), lambda x, y: 0 * x)
    # -(0 - 4 w) / h**2 = 8 with h = 1/2
    assert w.values[1, 1] == pytest.approx(0.5)


def test_residual_contract_and_determinism(square, rng):
    g = square(65)
    ps = PoissonSolver(g)
    f = rng.standard_normal((63, 63))
    b = lambda x, y: np.cos(4 * x) * y  # noqa: E731
    w1 = ps.solve(f, b)
    w2 = PoissonSolver(g).solve(f, b)
    assert np.array_equal(w1.values, w2.values)
    assert np.abs(-laplacian_5pt(w1) - f).max() <= 1e-10 * (np.abs(f).max() + 1)


def test_maximum_principle(square):
    g = square(41)
    b = lambda x, y: np.sin(3 * x) + np.cos(2 * y) * x  # noqa: E731
    w = PoissonSolver(g).solve(np.zeros((39, 39)), b).values
    edge = w[g.boundary_mask]
    assert edge.min() - 1e-12 <= w.min() and w.max() <= edge.max() + 1e-12


def test_linearity(square, rng):
    g = square(21)
    ps = PoissonSolver(g)
    f1, f2 = rng.standard_normal((2, 19, 19))
    lhs = ps.solve(2 * f1 - 3 * f2).values
    rhs = 2 * ps.solve(f1).values - 3 * ps.solve(f2).values
    assert np.abs(lhs - rhs).max() < 1e-10


def test_input_checks(square):
    ps = PoissonSolver(square(9))
    with pytest.raises(ValueError, match="shape"):
        ps.solve(np.zeros((6, 6)))
    bad = np.zeros((7, 7))
    bad[2, 2] = np.inf
    with pytest.raises(ValueError, match="finite"):
        ps.solve(bad)


def test_prepare_is_fast(square):
    t = time.perf_counter()
    ps = PoissonSolver(square(201))
    ps.solve(np.ones((199, 199)))
    assert time.perf_counter() - t < 1.0
