"""Quasi-Monte Carlo ground truth and accuracy metrics."""

from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc

from .gaussian import Gaussian, SingularCovarianceError, kl_divergence, sample
from .network import evaluate
from .special import Phi_inv

# Keeps scrambled points off the cube boundary, where quantiles are infinite.
_U_LO = np.finfo(float).tiny
_U_HI = 1.0 - np.finfo(float).epsneg


@dataclass(frozen=True, eq=False)
class SampleSet:
    samples: np.ndarray
    replicate_id: int
    seed: int

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.ndim == 1:
            s = s[:, None]
        n = s.shape[0]
        if n < 1 or n & (n - 1):
            raise ValueError(f"sample count must be a power of two, got {n}")
        if not np.all(np.isfinite(s)):
            raise ValueError("samples contain non-finite values")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def n(self):
        return self.samples.shape[0]


@dataclass(frozen=True)
class Estimate:
    value: float
    se: float

    def __post_init__(self):
        if not self.se >= 0.0:
            raise ValueError("standard error must be nonnegative")


@dataclass(frozen=True)
class MetricReport:
    wasserstein_to_truth: Estimate
    kl_from_pseudo_true: Estimate  # KL(Y1 || approx)
    kl_to_pseudo_true: Estimate  # KL(approx || Y1)
    moments: Gaussian


def unit_cube_points(dim, n, seed, replicate_id=0):
    """Scrambled Sobol points in the open unit cube, keyed by ``(seed, replicate_id)``."""
    m = int(np.log2(n))
    if 2 ** m != n:
        raise ValueError(f"n must be a power of two, got {n}")
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), int(replicate_id)]))
    engine = qmc.Sobol(d=dim, scramble=True, bits=64, seed=rng)
    return np.clip(engine.random_base2(m), _U_LO, _U_HI)


def qmc_sample_network(net, x, n, seed, replicate_id=0):
    """Push ``n`` scrambled low-discrepancy draws of ``x`` through ``net``."""
    u = unit_cube_points(x.dim, n, seed, replicate_id)
    return SampleSet(evaluate(net, sample(x, u)), replicate_id, seed)


def pseudo_true(samples):
    """Gaussian with the empirical mean and unbiased covariance of the samples."""
    s = samples.samples if isinstance(samples, SampleSet) else np.atleast_2d(samples)
    if s.shape[0] < 2:
        raise ValueError("need at least two samples")
    cov = np.atleast_2d(np.cov(s, rowvar=False, ddof=1))
    return Gaussian(s.mean(axis=0), cov, repair=True)


def wasserstein_1d(approx, sorted_samples):
    """Quantile-grid estimate of ``W1(N(mu, var), empirical)``.

    ``mean |y_(i) - Q((i - 1/2) / N)|`` over the sorted samples.
    """
    y = np.asarray(sorted_samples, dtype=float).ravel()
    if approx.dim != 1:
        raise ValueError("the Wasserstein estimator is one-dimensional")
    if y.size > 1 and np.any(np.diff(y) < 0):
        raise ValueError("samples must be sorted ascending")
    mu = approx.mean[0]
    var = approx.cov[0, 0]
    if var <= 0.0:
        return float(np.mean(np.abs(y - mu)))
    n = y.size
    q = mu + np.sqrt(var) * Phi_inv((np.arange(1, n + 1) - 0.5) / n)
    return float(np.mean(np.abs(y - q)))


def quantile_grid(approx, n):
    """The ``n`` points at which ``wasserstein_1d`` evaluates the quantile function."""
    mu = approx.mean[0]
    sd = np.sqrt(approx.cov[0, 0])
    return mu + sd * Phi_inv((np.arange(1, n + 1) - 0.5) / n)


def _safe_kl(p, q):
    try:
        return kl_divergence(p, q)
    except SingularCovarianceError:
        return np.inf


def _mean_se(values):
    values = np.asarray(values, dtype=float)
    mean = float(np.mean(values))
    if values.size < 2 or not np.all(np.isfinite(values)):
        return Estimate(mean, 0.0)
    return Estimate(mean, float(np.std(values, ddof=1) / np.sqrt(values.size)))


def _check_scalar(approx, replicates):
    if approx.dim != 1:
        raise ValueError(f"metrics need a scalar output, got dimension {approx.dim}")
    for rep in replicates:
        if rep.samples.shape[1] != 1:
            raise ValueError("metrics need scalar-output samples")


def evaluate_method(approx, truth_replicates):
    """Wasserstein and both KL directions per replicate, as mean +- standard error."""
    replicates = list(truth_replicates)
    _check_scalar(approx, replicates)
    w, kl_fwd, kl_rev = [], [], []
    for rep in replicates:
        y1 = pseudo_true(rep)
        w.append(wasserstein_1d(approx, np.sort(rep.samples[:, 0])))
        kl_fwd.append(_safe_kl(y1, approx))
        kl_rev.append(_safe_kl(approx, y1))
    return MetricReport(_mean_se(w), _mean_se(kl_fwd), _mean_se(kl_rev), approx)


def evaluate_pseudo_true(truth_replicates):
    """Metrics row for ``Y1`` itself: each replicate scored against its own moments."""
    replicates = list(truth_replicates)
    w = []
    for rep in replicates:
        y1 = pseudo_true(rep)
        _check_scalar(y1, [rep])
        w.append(wasserstein_1d(y1, np.sort(rep.samples[:, 0])))
    pooled = pseudo_true(np.concatenate([rep.samples for rep in replicates]))
    zero = Estimate(0.0, 0.0)
    return MetricReport(_mean_se(w), zero, zero, pooled)


def histogram(samples, bins=50):
    """Counts and edges for the pooled scalar samples (plotting is left to the reader)."""
    y = np.asarray(samples, dtype=float).ravel()
    counts, edges = np.histogram(y, bins=bins)
    return counts, edges
