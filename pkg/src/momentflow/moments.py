"""Exact Gaussian moment maps of scalar activations.

For ``X ~ N(mu, nu)`` and a bivariate normal ``(X1, X2)``:

* ``M(mu; nu) = E sigma(X)``
* ``K(mu1, mu2; nu11, nu22, nu12) = Cov(sigma(X1), sigma(X2))``
* ``L(mu1; nu11, nu22, nu12) = Cov(sigma(X1), X2)``

The ``*_map`` functions broadcast over numpy arrays and are what the
propagators call; ``m``, ``k`` and ``l`` are the scalar entry points.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import ndtr

from .special import Phi2, Phi2_1, Phi2_delta, owens_t, perfect_correlation, phi, phi2

# Variances below this are treated as exactly zero by the kinked activations.
TINY_VARIANCE = 1e-12


class ActivationKind(str, Enum):
    PROBIT = "probit"
    GELU = "gelu"
    RELU = "relu"
    HEAVISIDE = "heaviside"
    SINE = "sine"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            names = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown activation {value!r}; expected one of {names}") from None


@dataclass(frozen=True)
class UniMoment:
    mu: float
    nu: float

    def __post_init__(self):
        if not self.nu >= 0.0:
            raise ValueError(f"variance must be nonnegative, got {self.nu}")


@dataclass(frozen=True)
class BiMoment:
    """Moments of a bivariate normal; ``nu12`` is clamped to Cauchy-Schwarz."""

    mu1: float
    mu2: float
    nu11: float
    nu22: float
    nu12: float

    def __post_init__(self):
        if not (self.nu11 >= 0.0 and self.nu22 >= 0.0):
            raise ValueError("variances must be nonnegative")
        object.__setattr__(self, "nu12", float(clamp_cross(self.nu11, self.nu22, self.nu12)))

    def swapped(self):
        return BiMoment(self.mu2, self.mu1, self.nu22, self.nu11, self.nu12)


def clamp_cross(nu11, nu22, nu12):
    """Project ``nu12`` onto the Cauchy-Schwarz interval.

    No margin is taken here: the correlation handed to the bivariate CDF is
    clamped away from +-1 separately, and a margin on ``nu12`` itself would
    bias every variance (``nu12 = nu11``) by a relative 1e-12.
    """
    bound = np.sqrt(np.asarray(nu11) * np.asarray(nu22))
    return np.clip(nu12, -bound, bound)


# -- pointwise activations -------------------------------------------------

def activation(kind, x):
    kind = ActivationKind.parse(kind)
    x = np.asarray(x, dtype=float)
    if kind is ActivationKind.PROBIT:
        return 2.0 * ndtr(x) - 1.0
    if kind is ActivationKind.GELU:
        return x * ndtr(x)
    if kind is ActivationKind.RELU:
        return np.maximum(x, 0.0)
    if kind is ActivationKind.HEAVISIDE:
        return (x >= 0.0).astype(float)
    return np.sin(x)


def derivative(kind, x):
    """Derivative used by linearization; ReLU takes 0 at the kink, Heaviside 0 a.e."""
    kind = ActivationKind.parse(kind)
    x = np.asarray(x, dtype=float)
    if kind is ActivationKind.PROBIT:
        return 2.0 * phi(x)
    if kind is ActivationKind.GELU:
        return ndtr(x) + x * phi(x)
    if kind is ActivationKind.RELU:
        return (x > 0.0).astype(float)
    if kind is ActivationKind.HEAVISIDE:
        return np.zeros_like(x)
    return np.cos(x)


# -- Phi (the CDF itself) as an activation; probit is 2 Phi - 1 --------------

def _phi_cdf_mean(mu, nu):
    return ndtr(mu / np.sqrt(1.0 + nu))


def _phi_cdf_cov(mu1, mu2, nu11, nu22, nu12):
    s1, s2 = 1.0 + nu11, 1.0 + nu22
    return Phi2_delta(mu1 / np.sqrt(s1), mu2 / np.sqrt(s2), nu12 / np.sqrt(s1 * s2))


def _phi_cdf_cross(mu1, nu11, nu12):
    s1 = 1.0 + nu11
    return nu12 / np.sqrt(s1) * phi(mu1 / np.sqrt(s1))


# -- GeLU ----------------------------------------------------------------------

def _gelu_mean(mu, nu):
    s = 1.0 + nu
    h = mu / np.sqrt(s)
    return nu / np.sqrt(s) * phi(h) + mu * ndtr(h)


def _gelu_cov(mu1, mu2, nu11, nu22, nu12):
    s1 = 1.0 + nu11
    s2 = 1.0 + nu22
    r1 = np.sqrt(s1)
    r2 = np.sqrt(s2)
    h1 = mu1 / r1
    h2 = mu2 / r2
    rho = nu12 / (r1 * r2)
    term1 = (mu1 * nu12 + mu2 * nu11 - mu1 * nu12 * nu11 / s1) / r1 * Phi2_1(h1, h2, rho)
    term2 = (mu2 * nu12 + mu1 * nu22 - mu2 * nu12 * nu22 / s2) / r2 * Phi2_1(h2, h1, rho)
    term3 = (
        (nu11 * nu22 + nu12 ** 2 * (1.0 - nu11 / s1 - nu22 / s2)) / (r1 * r2) * phi2(h1, h2, rho)
    )
    term4 = (mu1 * mu2 + nu12) * Phi2(h1, h2, rho)
    return term1 + term2 + term3 + term4 - _gelu_mean(mu1, nu11) * _gelu_mean(mu2, nu22)


def _gelu_cross(mu1, nu11, nu12):
    s1 = 1.0 + nu11
    h = mu1 / np.sqrt(s1)
    return nu12 * mu1 / s1 ** 1.5 * phi(h) + nu12 * ndtr(h)


# -- ReLU (the lambda -> inf limit of GeLU) ------------------------------------

def _safe_sqrt(nu):
    return np.sqrt(np.where(nu < TINY_VARIANCE, 1.0, nu))


def _relu_mean(mu, nu):
    sd = _safe_sqrt(nu)
    h = mu / sd
    return np.where(nu < TINY_VARIANCE, np.maximum(mu, 0.0), sd * phi(h) + mu * ndtr(h))


def _relu_cov(mu1, mu2, nu11, nu22, nu12):
    degenerate = (nu11 < TINY_VARIANCE) | (nu22 < TINY_VARIANCE)
    sd1 = _safe_sqrt(nu11)
    sd2 = _safe_sqrt(nu22)
    h1 = mu1 / sd1
    h2 = mu2 / sd2
    sd12 = sd1 * sd2
    rho = nu12 / sd12
    # (1 - rho^2) phi2 -> 0 as |rho| -> 1; match the limit Phi2 takes there
    density_term = np.where(perfect_correlation(rho), 0.0, (sd12 - nu12 ** 2 / sd12) * phi2(h1, h2, rho))
    val = (
        mu2 * sd1 * Phi2_1(h1, h2, rho)
        + mu1 * sd2 * Phi2_1(h2, h1, rho)
        + density_term
        + (mu1 * mu2 + nu12) * Phi2(h1, h2, rho)
        - _relu_mean(mu1, nu11) * _relu_mean(mu2, nu22)
    )
    return np.where(degenerate, 0.0, val)


def _relu_cross(mu1, nu11, nu12):
    return np.where(nu11 < TINY_VARIANCE, 0.0, nu12 * ndtr(mu1 / _safe_sqrt(nu11)))


# -- Heaviside 1{x >= 0} (the lambda -> inf limit of Phi) ---------------------

def _heaviside_mean(mu, nu):
    return np.where(nu < TINY_VARIANCE, (mu >= 0.0).astype(float), ndtr(mu / _safe_sqrt(nu)))


def _heaviside_cov(mu1, mu2, nu11, nu22, nu12):
    degenerate = (nu11 < TINY_VARIANCE) | (nu22 < TINY_VARIANCE)
    sd1 = _safe_sqrt(nu11)
    sd2 = _safe_sqrt(nu22)
    val = Phi2_delta(mu1 / sd1, mu2 / sd2, nu12 / (sd1 * sd2))
    return np.where(degenerate, 0.0, val)


def _heaviside_cross(mu1, nu11, nu12):
    sd1 = _safe_sqrt(nu11)
    return np.where(nu11 < TINY_VARIANCE, 0.0, nu12 / sd1 * phi(mu1 / sd1))


# -- sine ----------------------------------------------------------------------

def _sine_mean(mu, nu):
    return np.exp(-0.5 * nu) * np.sin(mu)


def _scaled_expm1(s, t):
    """``exp(s) * expm1(t)`` for ``s + |t| <= 0``, without overflow for large ``|t|``."""
    small = np.abs(t) < 1.0
    near = np.exp(s) * np.expm1(np.clip(t, -1.0, 1.0))
    far = np.exp(s + t) - np.exp(s)
    return np.where(small, near, far)


def _sine_cov(mu1, mu2, nu11, nu22, nu12):
    # Cauchy-Schwarz keeps s + |nu12| <= 0
    s = -0.5 * (nu11 + nu22)
    return 0.5 * (
        _scaled_expm1(s, nu12) * np.cos(mu1 - mu2) - _scaled_expm1(s, -nu12) * np.cos(mu1 + mu2)
    )


def _sine_cross(mu1, nu11, nu12):
    return nu12 * np.exp(-0.5 * nu11) * np.cos(mu1)


# -- dispatch --------------------------------------------------------------------

def mean_map(kind, mu, nu):
    """Vectorized ``M``."""
    kind = ActivationKind.parse(kind)
    mu = np.asarray(mu, dtype=float)
    nu = np.maximum(np.asarray(nu, dtype=float), 0.0)
    if kind is ActivationKind.PROBIT:
        return 2.0 * _phi_cdf_mean(mu, nu) - 1.0
    if kind is ActivationKind.GELU:
        return _gelu_mean(mu, nu)
    if kind is ActivationKind.RELU:
        return _relu_mean(mu, nu)
    if kind is ActivationKind.HEAVISIDE:
        return _heaviside_mean(mu, nu)
    return _sine_mean(mu, nu)


def cov_map(kind, mu1, mu2, nu11, nu22, nu12):
    """Vectorized ``K``; ``nu12`` is clamped to Cauchy-Schwarz first."""
    kind = ActivationKind.parse(kind)
    mu1, mu2 = np.asarray(mu1, dtype=float), np.asarray(mu2, dtype=float)
    nu11 = np.maximum(np.asarray(nu11, dtype=float), 0.0)
    nu22 = np.maximum(np.asarray(nu22, dtype=float), 0.0)
    nu12 = clamp_cross(nu11, nu22, np.asarray(nu12, dtype=float))
    if kind is ActivationKind.PROBIT:
        return 4.0 * _phi_cdf_cov(mu1, mu2, nu11, nu22, nu12)
    if kind is ActivationKind.GELU:
        return _gelu_cov(mu1, mu2, nu11, nu22, nu12)
    if kind is ActivationKind.RELU:
        return _relu_cov(mu1, mu2, nu11, nu22, nu12)
    if kind is ActivationKind.HEAVISIDE:
        return _heaviside_cov(mu1, mu2, nu11, nu22, nu12)
    return _sine_cov(mu1, mu2, nu11, nu22, nu12)


def cross_map(kind, mu1, nu11, nu12):
    """Vectorized ``L``; exactly linear in ``nu12``."""
    kind = ActivationKind.parse(kind)
    mu1 = np.asarray(mu1, dtype=float)
    nu11 = np.maximum(np.asarray(nu11, dtype=float), 0.0)
    nu12 = np.asarray(nu12, dtype=float)
    if kind is ActivationKind.PROBIT:
        return 2.0 * _phi_cdf_cross(mu1, nu11, nu12)
    if kind is ActivationKind.GELU:
        return _gelu_cross(mu1, nu11, nu12)
    if kind is ActivationKind.RELU:
        return _relu_cross(mu1, nu11, nu12)
    if kind is ActivationKind.HEAVISIDE:
        return _heaviside_cross(mu1, nu11, nu12)
    return _sine_cross(mu1, nu11, nu12)


def m(kind, u):
    return float(mean_map(kind, u.mu, u.nu))


def k(kind, b):
    return float(cov_map(kind, b.mu1, b.mu2, b.nu11, b.nu22, b.nu12))


def l(kind, b):  # noqa: E741
    """``Cov(sigma(X1), X2)``; ``mu2`` does not enter."""
    return float(cross_map(kind, b.mu1, b.nu11, b.nu12))


def relu_via_gelu_limit(u, lam):
    """``lam**-1 * M_gelu(lam*mu, lam**2*nu)``, which tends to ``M_relu(mu, nu)``."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    return float(mean_map(ActivationKind.GELU, lam * u.mu, lam * lam * u.nu) / lam)


def stochastic_variance_boost(mu, nu=None):
    """Extra diagonal variance of the stochastic neuron ``2*1{U < Phi(x)} - 1``.

    Equals ``4 E[Phi(xi)(1 - Phi(xi))]`` for ``xi ~ N(mu, nu)``, written with
    Owen's T. Accepts a ``UniMoment`` or arrays ``mu, nu``.
    """
    if isinstance(mu, UniMoment):
        mu, nu = mu.mu, mu.nu
        return float(stochastic_variance_boost(np.asarray(mu), np.asarray(nu)))
    mu = np.asarray(mu, dtype=float)
    nu = np.maximum(np.asarray(nu, dtype=float), 0.0)
    return 8.0 * owens_t(mu / np.sqrt(1.0 + nu), 1.0 / np.sqrt(1.0 + 2.0 * nu))
