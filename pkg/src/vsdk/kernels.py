"""Radial basis functions, scaling functions and (variably scaled) kernel matrices.

A variably scaled kernel evaluates a radial basis function on points lifted
into one extra dimension, ``x -> (x, psi(x))``. With a piecewise constant
``psi`` the lifted node set splits into separated sheets, and the kernel
becomes discontinuous across the jumps of ``psi``.

All matrix routines go through :func:`lift` and :func:`squared_distances`,
so a kernel matrix built with a scaling function is identical, entry by
entry, to the plain kernel matrix of the lifted points.
"""
import enum
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, DuplicateNodesWarning, ParameterError

__all__ = [
    "Family",
    "KernelSpec",
    "rbf_eval",
    "ScalingFunction",
    "ConstantScaling",
    "PhantomScaling",
    "lift",
    "squared_distances",
    "kernel_matrix",
    "gram_matrix",
    "vsdk_eval",
]


class Family(str, enum.Enum):
    MATERN0 = "matern0"
    MATERN2 = "matern2"
    MATERN4 = "matern4"
    GAUSS = "gauss"


def _matern0(r):
    return np.exp(-r)


def _matern2(r):
    return (1.0 + r) * np.exp(-r)


def _matern4(r):
    return (3.0 + 3.0 * r + r * r) * np.exp(-r)


def _gauss(r):
    return np.exp(-r * r)


_PROFILES = {
    Family.MATERN0: _matern0,
    Family.MATERN2: _matern2,
    Family.MATERN4: _matern4,
    Family.GAUSS: _gauss,
}

# smoothness order of the native space in 2-D, for reports only
SMOOTHNESS = {
    Family.MATERN0: "1.5",
    Family.MATERN2: "2.5",
    Family.MATERN4: "3.5",
    Family.GAUSS: "analytic",
}


@dataclass(frozen=True)
class KernelSpec:
    """A radial basis function ``phi(r / scale)``.

    ``scale`` stretches distances uniformly. The interpolation experiments
    use the unscaled profiles (``scale=1``).
    """

    family: Family
    scale: float = 1.0

    def __post_init__(self):
        try:
            object.__setattr__(self, "family", Family(self.family))
        except ValueError:
            names = ", ".join(f.value for f in Family)
            raise ParameterError(f"unknown kernel {self.family!r}; expected one of {names}") from None
        if not self.scale > 0:
            raise ParameterError(f"kernel scale must be positive, got {self.scale}")

    @property
    def name(self):
        return self.family.value

    def profile(self, r):
        """Evaluate phi on an array of non-negative distances (no checks)."""
        r = np.asarray(r, dtype=float)
        if self.scale != 1.0:
            r = r / self.scale
        return _PROFILES[self.family](r)

    def to_dict(self):
        return {"family": self.family.value, "scale": self.scale}


def rbf_eval(spec, r):
    """phi(r) for scalar or array ``r >= 0``."""
    if isinstance(spec, str):
        spec = KernelSpec(spec)
    arr = np.asarray(r, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise DomainError("radial distance must be non-negative")
    out = spec.profile(arr)
    return float(out) if out.ndim == 0 else out


class ScalingFunction:
    """Piecewise constant map from the domain to a finite set of values.

    Subclasses implement ``__call__(points) -> values`` for an ``(M, d)``
    array and expose the value set as ``levels``.
    """

    kind = "abstract"

    def __call__(self, points):
        raise NotImplementedError

    @property
    def levels(self):
        raise NotImplementedError


class ConstantScaling(ScalingFunction):
    kind = "constant"

    def __init__(self, alpha=0.0):
        self.alpha = float(alpha)

    def __call__(self, points):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return np.full(len(points), self.alpha)

    @property
    def levels(self):
        return (self.alpha,)

    def __repr__(self):
        return f"ConstantScaling({self.alpha})"


class PhantomScaling(ScalingFunction):
    """``psi = factor * phantom``, for edges that are known in advance."""

    kind = "phantom"

    def __init__(self, phantom, factor=1.0):
        self.phantom = phantom
        self.factor = float(factor)

    def __call__(self, points):
        return self.factor * self.phantom(points)

    @property
    def levels(self):
        return tuple(sorted({self.factor * v for v in self.phantom.levels}))

    def __repr__(self):
        return f"PhantomScaling({self.phantom!r}, factor={self.factor})"


def lift(points, psi=None):
    """Append ``psi(points)`` as an extra coordinate; identity when ``psi`` is None."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if psi is None:
        return points
    values = np.asarray(psi(points), dtype=float).reshape(-1)
    if len(values) != len(points):
        raise ParameterError("scaling function returned the wrong number of values")
    return np.column_stack([points, values])


def squared_distances(X, Y):
    """Pairwise squared Euclidean distances, accumulated coordinate by coordinate."""
    X = np.atleast_2d(X)
    Y = np.atleast_2d(Y)
    if X.shape[1] != Y.shape[1]:
        raise ParameterError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
    out = np.zeros((len(X), len(Y)))
    for k in range(X.shape[1]):
        diff = X[:, k, None] - Y[None, :, k]
        out += diff * diff
    return out


def kernel_matrix(spec, psi, X, Y):
    """Matrix ``K[i, j] = K_psi(X[i], Y[j])``."""
    d2 = squared_distances(lift(X, psi), lift(Y, psi))
    return spec.profile(np.sqrt(d2))


def gram_matrix(spec, psi, nodes):
    """Symmetric kernel matrix of a node set.

    The lower triangle is computed and mirrored, so the result is exactly
    symmetric. A warning is issued when two lifted nodes coincide, since the
    matrix is then singular.
    """
    lifted = lift(nodes, psi)
    if len(np.unique(lifted, axis=0)) != len(lifted):
        warnings.warn("duplicate (lifted) nodes make the kernel matrix singular",
                      DuplicateNodesWarning, stacklevel=2)
    A = spec.profile(np.sqrt(squared_distances(lifted, lifted)))
    lower = np.tril(A)
    return lower + np.tril(lower, -1).T


def vsdk_eval(spec, psi, x, y):
    """Kernel value ``phi(sqrt(|x - y|^2 + |psi(x) - psi(y)|^2))`` for two points."""
    x = np.asarray(x, dtype=float).reshape(1, -1)
    y = np.asarray(y, dtype=float).reshape(1, -1)
    return float(kernel_matrix(spec, psi, x, y)[0, 0])
