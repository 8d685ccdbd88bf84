"""Kernel interpolation with optional variable scaling, plus error metrics."""
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .errors import ConditioningError, DomainError, ParameterError
from .geometry import as_nodes
from .kernels import KernelSpec, gram_matrix, kernel_matrix

logger = logging.getLogger(__name__)

__all__ = [
    "DEFAULT_LAMBDA",
    "MAX_LAMBDA",
    "Interpolant",
    "fit",
    "evaluate",
    "node_residual",
    "rmse",
    "rel_l1",
    "loglog_slope",
    "loglog_fit",
]

DEFAULT_LAMBDA = 1e-12
MAX_LAMBDA = 1e-6
ESCALATION = 100.0
EVAL_CHUNK = 2048


@dataclass(frozen=True, eq=False)
class Interpolant:
    """``V(x) = sum_k c_k K_psi(x, x_k)`` fitted to ``values`` at ``nodes``.

    ``lam`` is the regularization actually used, which may exceed the
    requested one if the factorization had to be stabilized.
    """

    nodes: np.ndarray
    coefficients: np.ndarray
    spec: KernelSpec
    psi: object = None
    lam: float = DEFAULT_LAMBDA
    values: np.ndarray = field(default=None, repr=False)

    def __call__(self, points):
        return evaluate(self, points)

    def __len__(self):
        return len(self.coefficients)


def _factorize(A, lam):
    n = len(A)
    while True:
        try:
            return cho_factor(A + lam * np.eye(n), lower=True, check_finite=False), lam
        except LinAlgError:
            nxt = lam * ESCALATION if lam > 0 else DEFAULT_LAMBDA
            if nxt > MAX_LAMBDA * (1 + 1e-9):
                raise ConditioningError(
                    f"kernel matrix not positive definite even with lambda={lam:g}", lam=lam
                ) from None
            logger.warning("Cholesky failed with lambda=%g, retrying with %g", lam, nxt)
            lam = nxt


def fit(nodes, values, spec, psi=None, lam=DEFAULT_LAMBDA):
    """Solve ``(A + lam I) c = f`` for the kernel matrix ``A`` of ``nodes``.

    On a failed Cholesky factorization ``lam`` is multiplied by 100, up to
    1e-6, before a :class:`ConditioningError` is raised.
    """
    if isinstance(spec, str):
        spec = KernelSpec(spec)
    nodes = as_nodes(nodes)
    values = np.asarray(values, dtype=float).reshape(-1)
    if len(values) != len(nodes):
        raise ParameterError(f"{len(values)} values for {len(nodes)} nodes")
    if lam < 0:
        raise ParameterError(f"regularization must be non-negative, got {lam}")
    A = gram_matrix(spec, psi, nodes)
    factor, used = _factorize(A, float(lam))
    coef = cho_solve(factor, values, check_finite=False)
    return Interpolant(nodes, coef, spec, psi, used, values.copy())


def evaluate(interp, points, chunk=EVAL_CHUNK):
    """Evaluate the interpolant at the rows of ``points``, in blocks of ``chunk``."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    out = np.empty(len(points))
    for start in range(0, len(points), chunk):
        block = points[start:start + chunk]
        out[start:start + chunk] = kernel_matrix(interp.spec, interp.psi, block, interp.nodes) @ interp.coefficients
    return out


def node_residual(interp):
    """Largest deviation ``max_i |V(x_i) - f_i|`` at the training nodes."""
    return float(np.max(np.abs(evaluate(interp, interp.nodes) - interp.values)))


def _pair(a, b):
    a = np.asarray(a, dtype=float).reshape(-1)
    b = np.asarray(b, dtype=float).reshape(-1)
    if a.shape != b.shape:
        raise ParameterError(f"length mismatch: {a.size} vs {b.size}")
    return a, b


def rmse(a, b):
    a, b = _pair(a, b)
    return float(np.sqrt(np.mean((a - b) ** 2)))


def rel_l1(approx, truth):
    """Relative discrete L1 error ``|truth - approx|_1 / |truth|_1``."""
    approx, truth = _pair(approx, truth)
    norm = np.abs(truth).sum()
    if norm == 0:
        raise DomainError("relative L1 error is undefined for an all-zero reference")
    return float(np.abs(truth - approx).sum() / norm)


def loglog_fit(h, err):
    """Least-squares line through ``(log h, log err)``; returns ``(slope, intercept, residuals)``."""
    h, err = _pair(h, err)
    if h.size < 2:
        raise ParameterError("need at least two points for a slope")
    if np.any(h <= 0) or np.any(err <= 0):
        raise DomainError("log-log regression needs strictly positive data")
    x, y = np.log(h), np.log(err)
    xc = x - x.mean()
    denom = xc @ xc
    if denom == 0:
        raise DomainError("all fill distances are equal; slope undefined")
    slope = (xc @ (y - y.mean())) / denom
    intercept = y.mean() - slope * x.mean()
    return float(slope), float(intercept), y - (slope * x + intercept)


def loglog_slope(h, err):
    return loglog_fit(h, err)[0]
