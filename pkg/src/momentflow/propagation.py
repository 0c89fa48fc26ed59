"""Moment propagators: analytic moment matching and the baselines.

``propagate_analytic`` re-approximates every layer output by the Gaussian with
the same first two moments. The baselines are mean-field (analytic, but with
off-diagonal covariances dropped after every layer), linearization at the
mean, and the unscented transforms of the whole network.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .gaussian import DimensionError, Gaussian, cholesky
from .moments import cov_map, cross_map, derivative, mean_map
from .network import evaluate


def _check_dims(g, layer):
    if g.dim != layer.in_dim:
        raise DimensionError(f"layer expects input dim {layer.in_dim}, Gaussian has dim {g.dim}")


def layer_moment_match(g, layer, diagonal_only=False):
    """Exact mean and covariance of ``layer(X)`` for ``X ~ g``, as a Gaussian.

    With ``diagonal_only`` only the variances are computed and the returned
    covariance is diagonal.
    """
    _check_dims(g, layer)
    a, c = layer.a, layer.c
    mu = a @ g.mean + layer.b
    a_sigma = a @ g.cov
    nu = a_sigma @ a.T
    kappa = a_sigma @ c.T
    tau = c @ g.cov @ c.T
    nu_diag = np.diag(nu).copy()

    mean = mean_map(layer.kind, mu, nu_diag) + c @ g.mean + layer.d

    if diagonal_only:
        k_diag = cov_map(layer.kind, mu, mu, nu_diag, nu_diag, nu_diag)
        l_diag = cross_map(layer.kind, mu, nu_diag, np.diag(kappa))
        var = k_diag + 2.0 * l_diag + np.diag(tau)
        return Gaussian(mean, np.diag(np.maximum(var, 0.0)))

    m = mu.size
    iu, ju = np.triu_indices(m)
    k_upper = cov_map(layer.kind, mu[iu], mu[ju], nu_diag[iu], nu_diag[ju], nu[iu, ju])
    k_full = np.empty((m, m))
    k_full[iu, ju] = k_upper
    k_full[ju, iu] = k_upper
    # cross[i, j] = Cov(sigma((AX+b)_i), (CX)_j)
    cross = cross_map(layer.kind, mu[:, None], nu_diag[:, None], kappa)
    cov = k_full + cross + cross.T + tau
    return Gaussian(mean, cov, repair=True)


def propagate_analytic(net, x):
    """Layer-by-layer moment matching; returns the Gaussian after every layer."""
    out = []
    g = x
    for layer in net:
        g = layer_moment_match(g, layer)
        out.append(g)
    return out


def propagate_mean_field(net, x):
    g = x
    for layer in net:
        g = layer_moment_match(g, layer, diagonal_only=True)
    return g


def propagate_linear(net, x):
    """Delta-method propagation: ``N(f(mu), J Sigma J^T)`` with ``J`` the Jacobian at ``mu``."""
    if x.dim != net.in_dim:
        raise DimensionError(f"network expects input dim {net.in_dim}, Gaussian has dim {x.dim}")
    point = x.mean
    cov = x.cov
    for layer in net:
        pre = layer.a @ point + layer.b
        jac = derivative(layer.kind, pre)[:, None] * layer.a + layer.c
        cov = jac @ cov @ jac.T
        point = layer(point)
    return Gaussian(point, cov, repair=True)


class UnscentedVariant(str, Enum):
    U95 = "u95"
    U02 = "u02"


@dataclass(frozen=True)
class SigmaPointScheme:
    """Sigma-point rule; ``U95`` reads only ``kappa``."""

    variant: UnscentedVariant = UnscentedVariant.U95
    kappa: float = 2.0
    alpha: float = 1e-3
    beta: float = 2.0

    @classmethod
    def u95(cls, kappa=2.0):
        return cls(UnscentedVariant.U95, kappa=kappa)

    @classmethod
    def u02(cls, alpha=1e-3, beta=2.0, kappa=2.0):
        return cls(UnscentedVariant.U02, kappa=kappa, alpha=alpha, beta=beta)

    def spread(self, n):
        """Scale ``sqrt(n + lambda)`` applied to the columns of the Cholesky factor."""
        return np.sqrt(n + self._lambda(n))

    def _lambda(self, n):
        if self.variant is UnscentedVariant.U95:
            return self.kappa
        return self.alpha ** 2 * (n + self.kappa) - n

    def weights(self, n):
        lam = self._lambda(n)
        c = n + lam
        wm = np.full(2 * n + 1, 0.5 / c)
        wc = wm.copy()
        if self.variant is UnscentedVariant.U95:
            wm[0] = wc[0] = self.kappa / c
        else:
            wm[0] = lam / c
            wc[0] = wm[0] + 1.0 - self.alpha ** 2 + self.beta
        return wm, wc


def sigma_points(g, scheme):
    """``(2n+1, n)`` sigma points with mean and covariance weights."""
    n = g.dim
    root = scheme.spread(n) * cholesky(g.cov)
    pts = np.empty((2 * n + 1, n))
    pts[0] = g.mean
    pts[1:n + 1] = g.mean + root.T
    pts[n + 1:] = g.mean - root.T
    wm, wc = scheme.weights(n)
    return pts, wm, wc


def propagate_unscented(net, x, scheme=None):
    """Unscented transform of the whole network (sigma points on the input)."""
    scheme = scheme or SigmaPointScheme.u95()
    if x.dim != net.in_dim:
        raise DimensionError(f"network expects input dim {net.in_dim}, Gaussian has dim {x.dim}")
    pts, wm, wc = sigma_points(x, scheme)
    y = evaluate(net, pts)
    mean = wm @ y
    dev = y - mean
    cov = (wc[:, None] * dev).T @ dev
    return Gaussian(mean, cov, repair=True)
