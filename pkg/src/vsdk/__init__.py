"""Scattered data interpolation of discontinuous functions with variably scaled discontinuous kernels."""
from .errors import (
    ConditioningError,
    ConvergenceError,
    DomainError,
    DuplicateNodesWarning,
    ParameterError,
    ParseError,
    ValidationError,
    VSDKError,
)
from .geometry import (
    LissajousParams,
    fill_distance_bounds,
    fill_distance_brute,
    fill_distance_closed,
    lissajous_count,
    lissajous_nodes,
    uniform_grid,
)
from .interpolation import Interpolant, evaluate, fit, loglog_slope, node_residual, rel_l1, rmse
from .kernels import (
    ConstantScaling,
    Family,
    KernelSpec,
    PhantomScaling,
    gram_matrix,
    kernel_matrix,
    rbf_eval,
    vsdk_eval,
)
from .phantoms import GeometricPhantom, SheppLogan, make_phantom, sample_phantom
from .segmentation import (
    ClassifierScaling,
    SvmModel,
    build_scaling,
    kmeans_1d,
    labels_kmeans,
    labels_max_fraction,
    labels_rbf_coeff,
    labels_threshold,
    svm_decide,
    svm_train,
)

__version__ = "0.1.0"
