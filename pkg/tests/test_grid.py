import numpy as np
import pytest

from plaplace import GridFunction, make_grid, max_norm_diff, sample
from plaplace.grid import boundary_values, read_csv, with_boundary, write_csv
from plaplace.reference import exact_solution


def test_grid_201_spacing(square):
    assert square(201).h == pytest.approx(0.01)


def test_smallest_grid():
    g = make_grid((0, 1, 0, 1), 3)
    assert g.h == 0.5
    assert g.num_interior == 1
    assert g.node(1, 1) == (0.5, 0.5)


def test_interior_block(square):
    g = square(5)
    X, Y = g.mesh
    xs = X[g.interior_mask].reshape(3, 3)
    assert np.allclose(np.unique(xs), [-0.5, 0.0, 0.5])
    assert g.interior_mask.sum() == 9


@pytest.mark.parametrize("bounds,n", [((0, 1, 0, 2), 5), ((0, 1, 0, 1), 2), ((1, 0, 0, 1), 5)])
def test_invalid_grids(bounds, n):
    with pytest.raises(ValueError):
        make_grid(bounds, n)


def test_classification_partitions_nodes(square):
    g = square(7)
    assert (g.boundary_mask ^ g.interior_mask).all()
    assert g.boundary_mask.sum() == 4 * 7 - 4
    assert g.num_interior == 25


def test_node_round_trip(square):
    g = square(33)
    for i in range(g.n):
        for j in (0, 5, 32):
            assert g.nearest_index(*g.node(i, j)) == (i, j)


def test_sample_examples(square):
    g = square(201)
    assert not sample(0.0, g).values.any()
    x = sample(lambda x, y: x, g).values
    assert np.allclose(np.diff(x, axis=0), g.h)
    assert np.allclose(np.diff(x, axis=1), 0.0)
    a = sample(exact_solution("aronsson"), g)
    assert a.values[g.nearest_index(0, 0)] == 0.0
    assert a.values[g.nearest_index(1, 0)] == pytest.approx(1.0)


def test_sample_scalar_only_callable(square):
    g = square(5)
    f = lambda x, y: max(x, y)  # noqa: E731, not vectorised
    assert sample(f, g).values[4, 0] == 1.0


def test_sample_rejects_nonfinite(square):
    with pytest.raises(ValueError, match="not finite"), np.errstate(divide="ignore"):
        sample(lambda x, y: 1.0 / x, square(5))


def test_max_norm_diff(square):
    g = square(9)
    a = sample(lambda x, y: np.sin(x + y), g)
    assert max_norm_diff(a, a) == 0.0
    assert max_norm_diff(sample(0.0, g), sample(0.3, g)) == pytest.approx(0.3)
    g1 = make_grid((0, 1, 0, 1), 11)
    h = g1.h
    d = max_norm_diff(sample(lambda x, y: x, g1), sample(lambda x, y: x + h * x, g1), interior_only=True)
    assert d == pytest.approx(h * (1 - h))
    with pytest.raises(ValueError):
        max_norm_diff(a, sample(0.0, square(7)))


def test_gridfunction_checks(square):
    g = square(5)
    with pytest.raises(ValueError):
        GridFunction(g, np.zeros((4, 4)))
    with pytest.raises(ValueError):
        GridFunction(g, np.full((5, 5), np.nan))
    u = sample(lambda x, y: x, g)
    assert np.allclose((u + u - 2 * u).values, 0)
    with pytest.raises(ValueError):
        u + sample(0.0, square(7))


def test_boundary_helpers(square):
    g = square(6)
    f = exact_solution("affine").func
    b = boundary_values(g, f)
    assert not b[g.interior_mask].any()
    u = with_boundary(np.zeros(g.shape), g, f)
    assert np.allclose(u[g.boundary_mask], sample(f, g).values[g.boundary_mask])


def test_csv_round_trip(square, tmp_path):
    g = square(9)
    u = sample(lambda x, y: np.exp(x) * np.cos(3 * y), g)
    path = tmp_path / "u.csv"
    write_csv(u, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "# gridfunction-v1"
    assert lines[1].startswith("# n=9 ")
    # one line per y-index, x varies along the line
    assert lines[2].split(",")[3] == repr(float(u.values[3, 0]))
    v = read_csv(path)
    assert v.grid == g
    assert np.array_equal(v.values, u.values)
