"""Exact Gaussian moment propagation through residual networks."""

from .diagnostics import LayerBound, error_recursion, lipschitz_bound, nonnormality_bound
from .ensembles import Architecture, EnsembleSpec, InputVariance, build_network, input_gaussian
from .gaussian import (
    DimensionError,
    Gaussian,
    LinearMap,
    SingularCovarianceError,
    affine_pushforward,
    kl_divergence,
    psd_repair,
    sample,
)
from .moments import ActivationKind, BiMoment, UniMoment, k, l, m, stochastic_variance_boost
from .network import LayerParams, Network, evaluate
from .oracle import MetricReport, SampleSet, evaluate_method, pseudo_true, qmc_sample_network, wasserstein_1d
from .propagation import (
    SigmaPointScheme,
    UnscentedVariant,
    layer_moment_match,
    propagate_analytic,
    propagate_linear,
    propagate_mean_field,
    propagate_unscented,
)
from .report import run_benchmark

__version__ = "0.1.0"
