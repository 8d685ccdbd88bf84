import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vsdk import GeometricPhantom, ParameterError, SheppLogan, make_phantom, sample_phantom, uniform_grid
from vsdk.phantoms import SHEPP_LOGAN_TABLE, Ellipse


def test_shepp_logan_has_ten_ellipses():
    assert len(SHEPP_LOGAN_TABLE) == 10
    assert len(SheppLogan().ellipses) == 10


def test_shepp_logan_corner_is_zero():
    assert SheppLogan()(np.array([[0.95, 0.95]]))[0] == 0


def test_shepp_logan_range_on_grid():
    v = SheppLogan()(uniform_grid(150))
    assert v.min() == 0.0 and v.max() == 1.0
    assert set(np.unique(v)) <= set(SheppLogan().levels)


def test_shepp_logan_known_regions():
    sl = SheppLogan()
    # skull rim, brain matter, inside the upper small ellipse
    pts = np.array([[0.0, 0.9], [0.0, -0.3], [0.0, 0.35]])
    np.testing.assert_array_equal(sl(pts), [1.0, 0.2, 0.3])


def test_ellipse_rotation_oracle():
    e = Ellipse(0.22, 0.0, 0.11, 0.31, -18.0)
    th = np.deg2rad(-18.0)
    # the tip of the major axis lies on the boundary, which counts as inside
    tip = np.array([[0.22 - 0.3 * np.sin(th), 0.3 * np.cos(th)]])
    assert e.contains(tip)[0]
    assert not e.contains(np.array([[0.22 + 0.12 * np.cos(th), 0.12 * np.sin(th)]]))[0]


def test_geometric_single_shapes():
    g = GeometricPhantom()
    pts = np.array([
        [0.1, -0.6],   # parabola only
        [0.0, 0.0],    # nothing
        [0.4, 0.45],   # rectangle only
        [-0.4, 0.45],  # ellipse only
    ])
    np.testing.assert_array_equal(g(pts), [2.0, 0.0, 1.5, 1.0])


def test_geometric_boundary_counts_as_inside():
    g = GeometricPhantom()
    pts = np.array([[0.05, 0.3], [0.75, 0.65], [-0.75, 0.45], [0.1, -0.25], [0.1, -0.85]])
    np.testing.assert_array_equal(g(pts), [1.5, 1.5, 1.0, 2.0, 2.0])


def test_geometric_shapes_disjoint_and_levels():
    g = GeometricPhantom()
    grid = uniform_grid(300)
    overlap = g.in_ellipse(grid).astype(int) + g.in_rectangle(grid) + g.in_parabola(grid)
    assert overlap.max() == 1
    assert set(np.unique(g(grid))) == {0.0, 1.0, 1.5, 2.0}
    assert set(g.levels) == {0, 1, 1.5, 2, 2.5, 3, 3.5, 4.5}


def test_geometric_corners_zero():
    corners = np.array([[-1, -1], [1, -1], [-1, 1], [1, 1]], dtype=float)
    np.testing.assert_array_equal(sample_phantom(GeometricPhantom(), corners), 0)


def test_sampling_cardinality_and_determinism():
    grid = uniform_grid(150)
    for name in ("shepp-logan", "geometric"):
        ph = make_phantom(name)
        a, b = ph(grid), ph(grid)
        assert a.shape == (22500,)
        np.testing.assert_array_equal(a, b)


def test_rect_shift_moves_rectangle():
    g = GeometricPhantom(rect_shift=-0.3)
    assert g(np.array([[-0.02, 0.45]]))[0] == 1.5
    assert g(np.array([[0.6, 0.45]]))[0] == 0.0


def test_unknown_phantom():
    with pytest.raises(ParameterError):
        make_phantom("brain")


@settings(max_examples=100, deadline=None)
@given(st.floats(-1, 1), st.floats(-1, 1))
def test_values_in_level_sets(x, y):
    p = np.array([[x, y]])
    assert SheppLogan()(p)[0] in SheppLogan().levels
    assert 0 <= SheppLogan()(p)[0] <= 1
    assert GeometricPhantom()(p)[0] in GeometricPhantom().levels
