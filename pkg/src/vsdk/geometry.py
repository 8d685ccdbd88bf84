"""Interpolation node sets on the square [-1, 1]^2.

Node sets are plain ``(N, d)`` float arrays. This module builds Lissajous
node sets and uniform grids and measures how well a node set fills the
square (its fill distance).
"""
import warnings
from dataclasses import dataclass
from math import gcd

import numpy as np
from scipy.spatial import cKDTree

from .errors import DomainError, DuplicateNodesWarning, ParameterError

__all__ = [
    "LissajousParams",
    "lissajous_curve",
    "lissajous_nodes",
    "lissajous_count",
    "fill_distance_closed",
    "fill_distance_bounds",
    "fill_distance_brute",
    "uniform_grid",
    "as_nodes",
]

DEDUP_RADIUS = 1e-10


@dataclass(frozen=True)
class LissajousParams:
    n1: int
    n2: int
    eps: int = 2

    def __post_init__(self):
        for name in ("n1", "n2", "eps"):
            if int(getattr(self, name)) != getattr(self, name):
                raise ParameterError(f"{name} must be an integer")
        if self.n1 < 1 or self.n2 < 1:
            raise ParameterError(f"frequencies must be positive, got ({self.n1}, {self.n2})")
        if gcd(self.n1, self.n2) != 1:
            raise ParameterError(f"frequencies ({self.n1}, {self.n2}) are not relatively prime")
        if self.eps not in (1, 2):
            raise ParameterError(f"eps must be 1 or 2, got {self.eps}")

    @property
    def n_samples(self):
        return 2 * self.eps * self.n1 * self.n2


def lissajous_curve(params, t):
    """Evaluate the generating curve at parameter values ``t``; returns (len(t), 2)."""
    t = np.asarray(t, dtype=float)
    shift = (params.eps - 1) * np.pi / (2 * params.n2)
    return np.stack([np.cos(params.n2 * t), np.cos(params.n1 * t - shift)], axis=-1)


def lissajous_nodes(n1, n2, eps=2):
    """Lissajous nodes of the curve with frequencies (n1, n2).

    The curve is sampled at ``t_k = pi k / (eps n1 n2)`` for
    ``k = 0, ..., 2 eps n1 n2 - 1``. Samples closer than ``DEDUP_RADIUS``
    to an earlier sample are dropped, so the returned nodes keep the order of
    increasing ``k``.
    """
    params = LissajousParams(n1, n2, eps)
    k = np.arange(params.n_samples)
    samples = lissajous_curve(params, np.pi * k / (params.eps * params.n1 * params.n2))
    # rounding to a fixed number of digits would split pairs that straddle a
    # rounding boundary, so coincident samples are matched by distance instead
    pairs = cKDTree(samples).query_pairs(DEDUP_RADIUS, output_type="ndarray")
    keep = np.ones(len(samples), dtype=bool)
    keep[pairs.max(axis=1)] = False
    return samples[keep]


def lissajous_count(n1, n2):
    """Number of nodes for eps=2 and n1 + n2 odd."""
    return 2 * n1 * n2 + n1 + n2


def _sin_pi_over(n):
    return np.sin(np.pi / n)


def fill_distance_closed(n1, n2):
    """Closed-form fill distance of the eps=2 Lissajous nodes in [-1, 1]^2."""
    if n1 < 2 or n2 < 2:
        raise ParameterError(f"closed-form fill distance needs n1, n2 >= 2, got ({n1}, {n2})")
    if gcd(n1, n2) != 1:
        raise ParameterError(f"frequencies ({n1}, {n2}) are not relatively prime")
    s1, s2 = _sin_pi_over(n1), _sin_pi_over(n2)
    d1, d2 = _sin_pi_over(2 * n1), _sin_pi_over(2 * n2)
    first = np.hypot(s1, (d1**2 + d2**2 - s1 * d1) / d2)
    second = np.hypot(s2, (d1**2 + d2**2 - s2 * d2) / d1)
    return 0.5 * float(max(first, second))


def fill_distance_bounds(n1, n2):
    """Return ``(lower, upper, coarse_upper)`` enclosing :func:`fill_distance_closed`.

    ``lower = max(S_n1, S_n2) / 2``, ``upper = max(S_2n1, S_2n2)`` and
    ``coarse_upper = max(pi / 2n1, pi / 2n2)``, where ``S_n = sin(pi / n)``.
    """
    lower = 0.5 * max(_sin_pi_over(n1), _sin_pi_over(n2))
    upper = max(_sin_pi_over(2 * n1), _sin_pi_over(2 * n2))
    coarse = max(np.pi / (2 * n1), np.pi / (2 * n2))
    return float(lower), float(upper), float(coarse)


def fill_distance_brute(nodes, grid_resolution=1001, lo=-1.0, hi=1.0, chunk=250_000):
    """Largest distance from a point of a uniform test grid to its nearest node.

    The grid has ``grid_resolution`` points per axis on ``[lo, hi]^2``. The
    result underestimates the true fill distance by at most half a grid
    diagonal.
    """
    nodes = np.asarray(nodes, dtype=float)
    if nodes.ndim != 2 or len(nodes) == 0:
        raise DomainError("fill distance of an empty node set is undefined")
    if grid_resolution < 2:
        raise ParameterError("grid_resolution must be at least 2")
    tree = cKDTree(nodes)
    axis = np.linspace(lo, hi, grid_resolution)
    rows_per_chunk = max(1, chunk // grid_resolution)
    worst = 0.0
    for start in range(0, grid_resolution, rows_per_chunk):
        ys = axis[start:start + rows_per_chunk]
        pts = np.column_stack([np.tile(axis, len(ys)), np.repeat(ys, grid_resolution)])
        dist, _ = tree.query(pts)
        worst = max(worst, float(dist.max()))
    return worst


def uniform_grid(M, lo=-1.0, hi=1.0):
    """M x M equispaced points on [lo, hi]^2, row-major (x runs fastest)."""
    if int(M) != M or M < 2:
        raise ParameterError(f"grid size must be an integer >= 2, got {M}")
    axis = np.linspace(lo, hi, int(M))
    xx, yy = np.meshgrid(axis, axis)
    return np.column_stack([xx.ravel(), yy.ravel()])


def as_nodes(points, lo=-1.0, hi=1.0, check_distinct=False):
    """Validate and return ``points`` as an ``(N, d)`` float array inside the box."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(1, -1)
    if pts.ndim != 2:
        raise ParameterError(f"node array must be 2-D, got shape {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise DomainError("node coordinates must be finite")
    if pts.size and (pts.min() < lo or pts.max() > hi):
        raise DomainError(f"nodes must lie in [{lo}, {hi}]^{pts.shape[1]}")
    if check_distinct and len(np.unique(pts, axis=0)) != len(pts):
        warnings.warn("node set contains duplicate points", DuplicateNodesWarning, stacklevel=2)
    return pts
