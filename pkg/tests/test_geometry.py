from math import gcd

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vsdk import (
    DomainError,
    ParameterError,
    fill_distance_bounds,
    fill_distance_brute,
    fill_distance_closed,
    lissajous_count,
    lissajous_nodes,
    uniform_grid,
)
from vsdk.geometry import LissajousParams, as_nodes, lissajous_curve


def _dedupe_pairwise(points, tol=1e-9):
    """O(N^2) duplicate removal, independent of the KD-tree used by the library."""
    kept = []
    for p in points:
        if all(np.hypot(*(p - q)) > tol for q in kept):
            kept.append(p)
    return np.array(kept)


def test_first_sample_is_curve_at_zero():
    nodes = lissajous_nodes(2, 3)
    np.testing.assert_allclose(nodes[0], [1.0, np.sqrt(3) / 2], rtol=0, atol=1e-15)


def test_count_2_3_matches_bruteforce_dedup():
    params = LissajousParams(2, 3, 2)
    samples = lissajous_curve(params, np.pi * np.arange(24) / 12)
    oracle = _dedupe_pairwise(samples)
    assert len(oracle) == 17 == lissajous_count(2, 3)
    nodes = lissajous_nodes(2, 3)
    np.testing.assert_array_equal(nodes, oracle)


def test_count_32_33():
    assert lissajous_count(32, 33) == 2177
    assert len(lissajous_nodes(32, 33)) == 2177
    assert len(lissajous_nodes(33, 32)) == 2177


def test_count_formula_all_small_coprime_pairs():
    for n1 in range(2, 51):
        for n2 in range(2, 51):
            if gcd(n1, n2) == 1 and (n1 + n2) % 2 == 1:
                assert len(lissajous_nodes(n1, n2)) == lissajous_count(n1, n2), (n1, n2)


def test_padua_curve_counts():
    # eps=1 on (n, n+1) gives the Padua points, (n+1)(n+2)/2 of them
    for n in range(1, 12):
        assert len(lissajous_nodes(n, n + 1, eps=1)) == (n + 1) * (n + 2) // 2


def test_nodes_in_square_and_distinct():
    nodes = lissajous_nodes(10, 11)
    assert np.all(np.abs(nodes) <= 1)
    d = np.hypot(*(nodes[:, None, :] - nodes[None, :, :]).transpose(2, 0, 1))
    np.fill_diagonal(d, np.inf)
    assert d.min() > 1e-6


@pytest.mark.parametrize("n1,n2,eps", [(2, 4, 2), (3, 3, 1), (2, 3, 3), (0, 3, 2)])
def test_invalid_params(n1, n2, eps):
    with pytest.raises(ParameterError):
        lissajous_nodes(n1, n2, eps)


def test_closed_form_2_3_by_hand():
    s2, s3, s4, s6 = 1.0, np.sqrt(3) / 2, np.sqrt(2) / 2, 0.5
    first = np.sqrt(s2**2 + ((s4**2 + s6**2 - s2 * s4) / s6) ** 2)
    second = np.sqrt(s3**2 + ((s4**2 + s6**2 - s3 * s6) / s4) ** 2)
    expected = 0.5 * max(first, second)
    assert fill_distance_closed(2, 3) == pytest.approx(expected, rel=1e-14)
    assert fill_distance_closed(2, 3) == pytest.approx(0.5018, abs=5e-5)


def test_closed_form_2_3_against_brute_force():
    h = fill_distance_closed(2, 3)
    assert abs(h - fill_distance_brute(lissajous_nodes(2, 3), 2001)) <= 2 * (2 / 2000)


def test_closed_form_10_11_interval():
    h = fill_distance_closed(10, 11)
    assert 0.5 * np.sin(np.pi / 10) <= h <= np.pi / 20
    assert 0.1545 <= h <= 0.1571


def test_closed_form_bounds_adjacent_pairs():
    # the bounds are stated for neighbouring frequencies; far apart pairs such as (2, 9) exceed them
    for n in range(2, 41):
        for n1, n2 in ((n, n + 1), (n + 1, n)):
            h = fill_distance_closed(n1, n2)
            lower, upper, coarse = fill_distance_bounds(n1, n2)
            assert lower <= h <= upper <= coarse, (n1, n2)


def test_closed_form_rejects_small_frequencies():
    with pytest.raises(ParameterError):
        fill_distance_closed(1, 2)
    with pytest.raises(ParameterError):
        fill_distance_closed(4, 6)


def test_brute_single_center_node():
    assert fill_distance_brute(np.array([[0.0, 0.0]]), 101) == pytest.approx(np.sqrt(2), abs=1e-14)


def test_brute_nodes_equal_grid():
    assert fill_distance_brute(uniform_grid(21), 21) == pytest.approx(0.0, abs=1e-15)


def test_brute_matches_direct_minimum():
    rng = np.random.default_rng(3)
    nodes = rng.uniform(-1, 1, (30, 2))
    axis = np.linspace(-1, 1, 201)
    grid = np.array([(x, y) for y in axis for x in axis])
    direct = np.sqrt(((grid[:, None, :] - nodes[None, :, :]) ** 2).sum(-1)).min(axis=1).max()
    assert fill_distance_brute(nodes, 201, chunk=1000) == pytest.approx(direct, rel=1e-14)


def test_brute_empty_raises():
    with pytest.raises(DomainError):
        fill_distance_brute(np.zeros((0, 2)), 11)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_brute_monotone_when_adding_nodes(seed):
    rng = np.random.default_rng(seed)
    nodes = rng.uniform(-1, 1, (8, 2))
    more = np.vstack([nodes, rng.uniform(-1, 1, (4, 2))])
    assert fill_distance_brute(more, 61) <= fill_distance_brute(nodes, 61)


def test_uniform_grid_corners_and_order():
    np.testing.assert_array_equal(uniform_grid(2), [[-1, -1], [1, -1], [-1, 1], [1, 1]])
    assert any(np.all(p == 0) for p in uniform_grid(3))
    g = uniform_grid(150)
    assert g.shape == (22500, 2)
    assert g[1, 0] - g[0, 0] == pytest.approx(2 / 149)
    with pytest.raises(ParameterError):
        uniform_grid(1)


def test_as_nodes_rejects_out_of_box():
    with pytest.raises(DomainError):
        as_nodes([[1.5, 0.0]])
