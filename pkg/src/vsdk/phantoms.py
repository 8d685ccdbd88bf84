"""Piecewise constant test images on [-1, 1]^2.

Both phantoms are finite sums of weighted indicator functions of closed
sets, evaluated analytically at arbitrary points.
"""
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import ParameterError
from .geometry import as_nodes

__all__ = [
    "Ellipse",
    "SHEPP_LOGAN_TABLE",
    "SHEPP_LOGAN_VERSION",
    "SheppLogan",
    "GeometricPhantom",
    "make_phantom",
    "sample_phantom",
]


@dataclass(frozen=True)
class Ellipse:
    """Closed ellipse with center, semi-axes and rotation angle in degrees."""

    x0: float
    y0: float
    a: float
    b: float
    angle: float = 0.0

    def contains(self, points):
        theta = np.deg2rad(self.angle)
        c, s = np.cos(theta), np.sin(theta)
        dx = points[:, 0] - self.x0
        dy = points[:, 1] - self.y0
        u = dx * c + dy * s
        w = -dx * s + dy * c
        return (u / self.a) ** 2 + (w / self.b) ** 2 <= 1.0


# Toft's modified Shepp-Logan table. Intensities are in tenths so that
# overlapping ellipses sum exactly; the image range is then exactly [0, 1].
SHEPP_LOGAN_VERSION = "shepp-logan-modified-toft/1"
SHEPP_LOGAN_TABLE = (
    # tenths, x0, y0, a, b, angle
    (10, 0.0, 0.0, 0.69, 0.92, 0.0),
    (-8, 0.0, -0.0184, 0.6624, 0.874, 0.0),
    (-2, 0.22, 0.0, 0.11, 0.31, -18.0),
    (-2, -0.22, 0.0, 0.16, 0.41, 18.0),
    (1, 0.0, 0.35, 0.21, 0.25, 0.0),
    (1, 0.0, 0.1, 0.046, 0.046, 0.0),
    (1, 0.0, -0.1, 0.046, 0.046, 0.0),
    (1, -0.08, -0.605, 0.046, 0.023, 0.0),
    (1, 0.0, -0.606, 0.023, 0.023, 0.0),
    (1, 0.06, -0.605, 0.023, 0.046, 0.0),
)


def _subset_sums(weights):
    sums = {0}
    for r in range(1, len(weights) + 1):
        for combo in combinations(weights, r):
            sums.add(sum(combo))
    return sums


class Phantom:
    name = "abstract"

    def __call__(self, points):
        raise NotImplementedError

    @property
    def levels(self):
        """Finite set containing every value the phantom can take."""
        raise NotImplementedError


class SheppLogan(Phantom):
    name = "shepp-logan"

    def __init__(self, table=SHEPP_LOGAN_TABLE):
        self.table = tuple(table)
        self.ellipses = tuple(Ellipse(x0, y0, a, b, ang) for _, x0, y0, a, b, ang in self.table)
        self.tenths = np.array([row[0] for row in self.table], dtype=np.int64)

    def __call__(self, points):
        points = as_nodes(points)
        acc = np.zeros(len(points), dtype=np.int64)
        for weight, ellipse in zip(self.tenths, self.ellipses):
            acc += weight * ellipse.contains(points)
        return acc / 10.0

    @property
    def levels(self):
        return tuple(sorted(s / 10.0 for s in _subset_sums(self.tenths.tolist())))

    def __repr__(self):
        return f"SheppLogan({SHEPP_LOGAN_VERSION!r})"


class GeometricPhantom(Phantom):
    """Ellipse (weight 1) + rectangle (1.5) + bounded parabola region (2).

    ``rect_shift`` moves the rectangle horizontally; the perturbation study
    uses it to build deliberately wrong scaling functions.
    """

    name = "geometric"
    weights = (1.0, 1.5, 2.0)
    ellipse = Ellipse(-0.4, 0.45, 0.35, 0.25)
    rect_x = (0.05, 0.75)
    rect_y = (0.25, 0.65)
    # region y <= apex - curvature (x - x0)^2, y >= floor, |x - x0| <= half_width
    parabola = {"x0": 0.1, "apex": -0.25, "curvature": 1.5, "floor": -0.85, "half_width": 0.55}

    def __init__(self, rect_shift=0.0):
        self.rect_shift = float(rect_shift)

    def in_ellipse(self, points):
        return self.ellipse.contains(points)

    def in_rectangle(self, points):
        x, y = points[:, 0], points[:, 1]
        x0, x1 = self.rect_x[0] + self.rect_shift, self.rect_x[1] + self.rect_shift
        return (x >= x0) & (x <= x1) & (y >= self.rect_y[0]) & (y <= self.rect_y[1])

    def in_parabola(self, points):
        p = self.parabola
        x, y = points[:, 0], points[:, 1]
        dx = x - p["x0"]
        return (y <= p["apex"] - p["curvature"] * dx * dx) & (y >= p["floor"]) & (np.abs(dx) <= p["half_width"])

    def __call__(self, points):
        points = as_nodes(points)
        we, wr, wp = self.weights
        return we * self.in_ellipse(points) + wr * self.in_rectangle(points) + wp * self.in_parabola(points)

    @property
    def levels(self):
        return tuple(sorted(_subset_sums(self.weights)))

    def __repr__(self):
        return f"GeometricPhantom(rect_shift={self.rect_shift})"


def make_phantom(name, **kwargs):
    if name in ("shepp-logan", "shepp_logan", "sl"):
        return SheppLogan(**kwargs)
    if name in ("geometric", "geo"):
        return GeometricPhantom(**kwargs)
    raise ParameterError(f"unknown phantom {name!r}; expected 'shepp-logan' or 'geometric'")


def sample_phantom(phantom, nodes):
    """Values of ``phantom`` at the rows of ``nodes``."""
    return phantom(nodes)
