"""Edge estimation from scattered samples.

Data values are first turned into class labels (thresholds on the values,
thresholds on RBF coefficient magnitudes, or 1-D k-means). A kernel SVM
trained on the labelled nodes then extends the classes to the whole
domain, which yields a piecewise constant scaling function.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, DomainError, ParameterError
from .geometry import as_nodes
from .interpolation import DEFAULT_LAMBDA, fit
from .kernels import KernelSpec, ScalingFunction, kernel_matrix

logger = logging.getLogger(__name__)

__all__ = [
    "SEGMENTATION_KERNEL",
    "DEFAULT_C",
    "KKT_TOL",
    "labels_threshold",
    "labels_max_fraction",
    "labels_rbf_coeff",
    "KMeansResult",
    "kmeans_1d",
    "labels_kmeans",
    "SvmModel",
    "svm_train",
    "svm_decide",
    "ClassifierScaling",
    "default_alphas",
    "build_scaling",
]

# Gauss kernel for the classifier. Without a length scale e^{-r^2} is nearly
# flat across [-1, 1]^2 and cannot resolve small regions at moderate C.
SEGMENTATION_KERNEL = KernelSpec("gauss", scale=0.1)
DEFAULT_C = 10.0
KKT_TOL = 1e-3
MAX_SMO_ITER = 10**6
DENOM_FLOOR = 1e-12


# -- labelling ---------------------------------------------------------------

def labels_threshold(values, thresholds):
    """Label ``j`` (1-based) for ``thresholds[j-1] <= v < thresholds[j]``."""
    values = np.asarray(values, dtype=float).reshape(-1)
    a = np.asarray(thresholds, dtype=float).reshape(-1)
    if a.size < 2 or np.any(np.diff(a) <= 0):
        raise ParameterError("thresholds must be strictly increasing with at least two entries")
    bad = np.flatnonzero((values < a[0]) | (values >= a[-1]) | np.isnan(values))
    if bad.size:
        i = int(bad[0])
        raise DomainError(f"value {values[i]!r} at index {i} outside [{a[0]}, {a[-1]})")
    return np.searchsorted(a, values, side="right").astype(int)


def labels_max_fraction(values, fraction=0.2):
    """Binary labels: 2 where ``v >= fraction * max(v)``, else 1."""
    values = np.asarray(values, dtype=float).reshape(-1)
    return np.where(values >= fraction * values.max(), 2, 1)


def labels_rbf_coeff(nodes, values, spec, thresholds, lam=DEFAULT_LAMBDA):
    """Bin the magnitudes of plain RBF interpolation coefficients.

    Large coefficients cluster near jumps of the data, so the top bins
    mark nodes close to an edge.
    """
    interp = fit(nodes, values, spec, None, lam)
    return labels_threshold(np.abs(interp.coefficients), thresholds)


@dataclass
class KMeansResult:
    labels: np.ndarray
    means: np.ndarray
    objective: list
    n_iter: int
    values: np.ndarray = field(default=None, repr=False)

    @property
    def l1_objective(self):
        """Sum of absolute deviations from the cluster means."""
        return float(np.abs(self.values - self.means[self.labels - 1]).sum())


def _kmeanspp_1d(values, k, rng):
    centers = [values[rng.integers(len(values))]]
    for _ in range(1, k):
        d2 = np.min((values[:, None] - np.asarray(centers)[None, :]) ** 2, axis=1)
        centers.append(values[rng.choice(len(values), p=d2 / d2.sum())])
    return np.sort(np.asarray(centers))


def kmeans_1d(values, k, seed=0, max_iter=300):
    """Lloyd iteration on scalar values with seeded k-means++ initialization.

    Positions of the samples play no role. Labels are 1-based and ordered by
    increasing cluster mean. ``objective`` holds the within-cluster sum of
    squares after every iteration.
    """
    values = np.asarray(values, dtype=float).reshape(-1)
    if int(k) != k or k < 1:
        raise ParameterError(f"k must be a positive integer, got {k}")
    n_distinct = len(np.unique(values))
    if k > n_distinct:
        raise ParameterError(f"k={k} exceeds the number of distinct values ({n_distinct})")
    rng = np.random.default_rng(seed)
    means = _kmeanspp_1d(values, k, rng)
    assign = None
    objective = []
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        new_assign = np.argmin((values[:, None] - means[None, :]) ** 2, axis=1)
        for j in range(k):
            members = values[new_assign == j]
            if members.size:
                means[j] = members.mean()
        objective.append(float(((values - means[new_assign]) ** 2).sum()))
        if assign is not None and np.array_equal(assign, new_assign):
            break
        assign = new_assign
    else:
        raise ConvergenceError(f"k-means did not converge in {max_iter} iterations")
    order = np.argsort(means, kind="stable")
    rank = np.empty(k, dtype=int)
    rank[order] = np.arange(k)
    return KMeansResult(rank[assign] + 1, means[order], objective, n_iter, values)


def labels_kmeans(values, k, seed=0):
    return kmeans_1d(values, k, seed).labels


# -- binary SVM ----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SvmModel:
    """Kernel SVM ``h(x) = sum_i beta_i z_i K(x, x_i) + b`` (support vectors only).

    ``classes`` holds the original label values mapped to -1 and +1.
    ``bias_fallback`` is set when no multiplier lies strictly inside (0, C)
    and the bias had to be taken from the midpoint of the feasible interval.
    """

    support: np.ndarray
    beta: np.ndarray
    z: np.ndarray
    b: float
    spec: KernelSpec
    C: float
    classes: tuple = (-1, 1)
    bias_fallback: bool = False
    n_iter: int = 0
    objective: list = field(default=None, repr=False)

    def decision_function(self, points):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if len(self.beta) == 0:
            return np.full(len(points), self.b)
        out = np.empty(len(points))
        w = self.beta * self.z
        for start in range(0, len(points), 4096):
            block = points[start:start + 4096]
            out[start:start + 4096] = kernel_matrix(self.spec, None, block, self.support) @ w + self.b
        return out

    def predict(self, points):
        """Signs of the decision function; zero counts as +1."""
        return np.where(self.decision_function(points) >= 0, 1, -1)

    def to_dict(self):
        return {
            "C": self.C,
            "kernel": self.spec.to_dict(),
            "bias": self.b,
            "classes": list(self.classes),
            "bias_fallback": self.bias_fallback,
            "support": [
                {"x": float(p[0]), "y": float(p[1]), "z": int(zi), "beta": float(bi)}
                for p, zi, bi in zip(self.support, self.z, self.beta)
            ],
        }

    @classmethod
    def from_dict(cls, data):
        sv = data["support"]
        kernel = data["kernel"]
        spec = KernelSpec(kernel) if isinstance(kernel, str) else KernelSpec(kernel["family"], kernel.get("scale", 1.0))
        return cls(
            support=np.array([[s["x"], s["y"]] for s in sv], dtype=float).reshape(-1, 2),
            beta=np.array([s["beta"] for s in sv], dtype=float),
            z=np.array([s["z"] for s in sv], dtype=float),
            b=float(data["bias"]),
            spec=spec,
            C=float(data["C"]),
            classes=tuple(data.get("classes", (-1, 1))),
            bias_fallback=bool(data.get("bias_fallback", False)),
        )


def _signed_labels(labels):
    labels = np.asarray(labels).reshape(-1)
    classes = np.unique(labels)
    if len(classes) != 2:
        raise ParameterError(f"SVM training needs exactly two classes, got {len(classes)}")
    if set(classes.tolist()) == {-1, 1}:
        return labels.astype(float), (-1, 1)
    lo, hi = classes.tolist()
    return np.where(labels == hi, 1.0, -1.0), (lo, hi)


def _dual_objective(beta, z, K):
    s = np.flatnonzero(beta)
    w = beta[s] * z[s]
    return float(beta.sum() - 0.5 * w @ K[np.ix_(s, s)] @ w)


def _bias(beta, z, K, C):
    w = beta * z
    g = K @ w
    free = (beta > 0) & (beta < C)
    if free.any():
        return float(np.mean(z[free] - g[free])), False
    # every feasible b keeps z_t (g_t + b) >= 1 for beta_t = 0 and <= 1 for beta_t = C
    cand = z - g
    lower = ((z > 0) & (beta == 0)) | ((z < 0) & (beta == C))
    upper = ~lower
    if lower.any() and upper.any():
        return float(0.5 * (cand[lower].max() + cand[upper].min())), True
    return float(cand[lower].max() if lower.any() else cand[upper].min()), True


def svm_train(nodes, labels, spec=SEGMENTATION_KERNEL, C=DEFAULT_C, tol=KKT_TOL,
              max_iter=MAX_SMO_ITER, track_objective=False):
    """Train a two-class kernel SVM by sequential minimal optimization.

    Solves the dual ``max sum(beta) - 1/2 sum_ki beta_k beta_i z_k z_i K_ki``
    subject to ``sum(beta z) = 0`` and ``0 <= beta <= C``. Each step updates
    the maximal KKT-violating pair; the loop stops once the violation drops
    below ``tol``. The bias is averaged over all multipliers strictly inside
    the box.

    With ``track_objective`` the exact dual objective is recorded after
    every step (quadratic in the number of support vectors, so meant for
    small problems).
    """
    if isinstance(spec, str):
        spec = KernelSpec(spec)
    if not C > 0:
        raise ParameterError(f"box constraint must be positive, got {C}")
    X = as_nodes(nodes, lo=-np.inf, hi=np.inf)
    z, classes = _signed_labels(labels)
    if len(z) != len(X):
        raise ParameterError(f"{len(z)} labels for {len(X)} nodes")
    K = kernel_matrix(spec, None, X, X)
    diag = np.diag(K).copy()
    n = len(z)
    beta = np.zeros(n)
    grad = -np.ones(n)  # gradient of 1/2 b'Qb - sum(b), Q = (z z') * K
    pos = z > 0
    history = [0.0] if track_objective else None
    it = 0
    while True:
        at_upper = beta >= C
        at_lower = beta <= 0
        up = np.where(pos, ~at_upper, ~at_lower)
        low = np.where(pos, ~at_lower, ~at_upper)
        score = -z * grad
        i = int(np.argmax(np.where(up, score, -np.inf)))
        j = int(np.argmin(np.where(low, score, np.inf)))
        gap = score[i] - score[j]
        if gap < tol:
            break
        if it >= max_iter:
            raise ConvergenceError(f"SMO did not reach tolerance {tol} in {max_iter} iterations (gap {gap:.3g})")
        it += 1
        curv = max(diag[i] + diag[j] - 2.0 * K[i, j], DENOM_FLOOR)
        # move beta_i by z_i*delta and beta_j by -z_j*delta; sum(beta z) is unchanged
        room_i = C - beta[i] if pos[i] else beta[i]
        room_j = beta[j] if pos[j] else C - beta[j]
        delta = min(gap / curv, room_i, room_j)
        beta[i] += z[i] * delta
        beta[j] -= z[j] * delta
        if delta == room_i:
            beta[i] = C if pos[i] else 0.0
        if delta == room_j:
            beta[j] = 0.0 if pos[j] else C
        beta[i] = min(max(beta[i], 0.0), C)
        beta[j] = min(max(beta[j], 0.0), C)
        grad += delta * z * (K[:, i] - K[:, j])
        if track_objective:
            history.append(_dual_objective(beta, z, K))
    b, fallback = _bias(beta, z, K, C)
    if fallback:
        logger.warning("no unbounded support vector; bias taken from the feasible interval midpoint")
    sv = np.flatnonzero(beta > 0)
    return SvmModel(X[sv], beta[sv], z[sv], b, spec, float(C), classes, fallback, it, history)


def svm_decide(model, p):
    """Sign (+1 or -1) of the decision function at a single point ``p``."""
    return int(model.predict(np.asarray(p, dtype=float).reshape(1, -1))[0])


# -- scaling function from a classifier ------------------------------------

class ClassifierScaling(ScalingFunction):
    """Piecewise constant ``psi`` from one or several binary SVMs.

    Two classes use a single model. More classes use one-vs-rest models and
    pick the class with the largest decision value (lowest index on ties).
    """

    kind = "classifier"

    def __init__(self, models, classes, alphas):
        self.models = tuple(models)
        self.classes = tuple(classes)
        self.alphas = np.asarray(alphas, dtype=float)

    def classify(self, points):
        """Index (0-based, into ``classes``) of the predicted class per point."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if len(self.models) == 1:
            return (self.models[0].predict(points) > 0).astype(int)
        scores = np.column_stack([m.decision_function(points) for m in self.models])
        return np.argmax(scores, axis=1)

    def predict_labels(self, points):
        return np.asarray(self.classes)[self.classify(points)]

    def __call__(self, points):
        return self.alphas[self.classify(points)]

    @property
    def levels(self):
        return tuple(self.alphas.tolist())

    def to_dict(self):
        return {
            "classes": [int(c) for c in self.classes],
            "alphas": self.alphas.tolist(),
            "models": [m.to_dict() for m in self.models],
        }

    @classmethod
    def from_dict(cls, data):
        return cls([SvmModel.from_dict(m) for m in data["models"]], data["classes"], data["alphas"])

    def __repr__(self):
        return f"ClassifierScaling(classes={self.classes}, alphas={self.alphas.tolist()})"


def default_alphas(n, spacing=0.5):
    """Scaling values ``0, spacing, 2 spacing, ...`` for ``n`` classes."""
    return spacing * np.arange(n, dtype=float)


def build_scaling(nodes, labels, spec=SEGMENTATION_KERNEL, C=DEFAULT_C, alphas=None, tol=KKT_TOL):
    """Train the classifier(s) on labelled nodes and wrap them as a scaling function.

    ``alphas[j]`` is the value of psi on the region of the j-th smallest label.
    """
    nodes = as_nodes(nodes, lo=-np.inf, hi=np.inf)
    labels = np.asarray(labels).reshape(-1)
    if len(labels) != len(nodes):
        raise ParameterError(f"{len(labels)} labels for {len(nodes)} nodes")
    classes = np.unique(labels)
    if len(classes) < 2:
        raise ParameterError("segmentation needs at least two classes; the labelling produced one")
    alphas = default_alphas(len(classes)) if alphas is None else np.asarray(alphas, dtype=float)
    if len(alphas) != len(classes):
        raise ParameterError(f"{len(alphas)} alpha values for {len(classes)} classes")
    if len(np.unique(alphas)) != len(alphas):
        raise ParameterError("alpha values must be pairwise distinct")
    if len(classes) == 2:
        models = [svm_train(nodes, labels, spec, C, tol)]
    else:
        models = [svm_train(nodes, np.where(labels == c, 1, -1), spec, C, tol) for c in classes]
    return ClassifierScaling(models, classes.tolist(), alphas)
