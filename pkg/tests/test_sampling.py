import numpy as np
import pytest

from nngp.sampling import (boundary_equispaced, halton, latin_hypercube,
                           to_box)


def test_halton_first_entries():
    # base-2 radical inverse starting at index 1: 1/2, 1/4, 3/4, ...
    pts = halton(4, 1).points
    assert np.allclose(pts[:, 0], [0.5, 0.25, 0.75, 0.125])


def test_halton_second_dimension_is_base3():
    pts = halton(3, 2).points
    assert np.allclose(pts[:, 1], [1 / 3, 2 / 3, 1 / 9])


def test_halton_deterministic_and_in_cube():
    a = halton(200, 5).points
    b = halton(200, 5).points
    assert np.array_equal(a, b)
    assert a.min() > 0.0 and a.max() < 1.0


def test_halton_prefix_property():
    # the first n rows of a longer sequence are the sequence of length n
    assert np.array_equal(halton(10, 3).points, halton(25, 3).points[:10])


def test_latin_hypercube_stratification():
    n = 17
    pts = latin_hypercube(n, 2, seed=3).points
    for d in range(2):
        # exactly one point per 1/n stratum in every coordinate
        strata = np.floor(pts[:, d] * n).astype(int)
        assert sorted(strata) == list(range(n))


def test_latin_hypercube_seed_controls_draw():
    a = latin_hypercube(20, 3, seed=0).points
    b = latin_hypercube(20, 3, seed=0).points
    c = latin_hypercube(20, 3, seed=1).points
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_boundary_equispaced_on_the_square():
    pts = boundary_equispaced(24).points
    assert pts.shape == (24, 2)
    on_edge = (np.isclose(pts, 0.0) | np.isclose(pts, 1.0)).any(axis=1)
    assert on_edge.all()
    # equispaced by arclength: consecutive gaps all equal 4/24
    rolled = np.roll(pts, -1, axis=0)
    gaps = np.abs(rolled - pts).sum(axis=1)
    assert np.allclose(gaps, 4.0 / 24.0)


def test_boundary_count_validation():
    with pytest.raises(ValueError):
        boundary_equispaced(3)


def test_to_box():
    pts = np.array([[0.0, 0.5], [1.0, 0.25]])
    out = to_box(pts, -1.0, 1.0)
    assert np.allclose(out, [[-1.0, 0.0], [1.0, -0.5]])
