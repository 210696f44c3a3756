from .base import FDCheck, QuadratureReference, Target, finite_diff_check, sign
from .data import (
    RegressionDataset,
    corrupt_image,
    load_diabetes,
    prepare_regression,
    read_diabetes_table,
    read_image,
    read_pgm,
    write_diabetes_table,
    write_pgm,
)
from .models import BridgeTarget, DenoiseTarget, FactorizationState, bridge_target, denoise_target
from .stochastic import StochasticTarget, gaussian_records, to_stochastic
from .synthetic import (
    DEFAULT_EPS0,
    AsymmetricWellTarget,
    DoubleWellTarget,
    FreeParticle,
    GaussianMixtureTarget,
    GaussianTarget,
    LpReference,
    LpTarget,
    PiecewiseWellTarget,
    QuadraticTarget,
    SpikySmoothTarget,
    asymmetric_well_target,
    double_well_target,
    gaussian_mixture_target,
    gaussian_target,
    lp_gradient,
    lp_target,
    piecewise_well_target,
    quadratic_target,
    spiky_smooth_target,
)
