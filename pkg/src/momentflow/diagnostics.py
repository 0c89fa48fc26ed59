"""Per-layer Lipschitz constants, the crude non-normality bound and their recursion.

The bound chain is ``cumulative_k = lipschitz_k * cumulative_{k-1} + nonnormality_k``
with ``cumulative_0 = 0``. The non-normality term uses the analytically
propagated covariances in place of the true ones, so it is a diagnostic
rather than a certificate.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .gaussian import jitter_ladder
from .moments import ActivationKind
from .propagation import propagate_analytic
from .special import Phi, phi

POWER_TOL = 1e-8
POWER_MAX_ITER = 10_000

_SQRT2 = np.sqrt(2.0)

# sup |sigma'| and sup |sigma''| over the real line.
# GeLU: sigma'' = phi(x)(2 - x^2) vanishes at sqrt(2), where sigma' peaks;
# |sigma''| peaks at 0. Probit: sigma'' = -2x phi(x) peaks at |x| = 1.
# ``sup_abs_numeric`` regenerates these from a grid plus bounded refinement.
DERIVATIVE_SUP = {
    ActivationKind.PROBIT: float(2.0 * phi(0.0)),
    ActivationKind.GELU: float(Phi(_SQRT2) + _SQRT2 * phi(_SQRT2)),
    ActivationKind.RELU: 1.0,
    ActivationKind.HEAVISIDE: np.inf,
    ActivationKind.SINE: 1.0,
}
SECOND_DERIVATIVE_SUP = {
    ActivationKind.PROBIT: float(2.0 * phi(1.0)),
    ActivationKind.GELU: float(2.0 * phi(0.0)),
    ActivationKind.RELU: np.inf,
    ActivationKind.HEAVISIDE: np.inf,
    ActivationKind.SINE: 1.0,
}


def sup_abs_numeric(fn, lo=-10.0, hi=10.0, n=20001):
    """``max |fn|`` on ``[lo, hi]``: dense grid, then bounded scalar refinement."""
    x = np.linspace(lo, hi, n)
    y = np.abs(fn(x))
    i = int(np.argmax(y))
    step = x[1] - x[0]
    res = minimize_scalar(
        lambda t: -abs(float(fn(np.array(t)))),
        bounds=(max(lo, x[i] - step), min(hi, x[i] + step)),
        method="bounded",
        options={"xatol": 1e-14},
    )
    return max(float(y[i]), -float(res.fun))


def spectral_norm(mat, tol=POWER_TOL, max_iter=POWER_MAX_ITER):
    """Largest singular value by power iteration on ``M^T M``."""
    mat = np.atleast_2d(np.asarray(mat, dtype=float))
    if not np.any(mat):
        return 0.0
    gram = mat.T @ mat
    v = np.ones(gram.shape[0]) / np.sqrt(gram.shape[0])
    # a deterministic start can be orthogonal to the top eigenvector; nudge it
    v = v + 1e-3 * np.arange(1, v.size + 1) / v.size
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(max_iter):
        w = gram @ v
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0
        v = w / norm
        if abs(norm - est) <= tol * norm:
            est = norm
            break
        est = norm
    return float(np.sqrt(est))


def _times(scale, norm):
    # inf * 0 is taken as 0: an absent path contributes nothing
    return 0.0 if norm == 0.0 else scale * norm


@dataclass(frozen=True)
class LayerBound:
    lipschitz: float
    nonnormality: float
    cumulative: float
    singular: bool = False

    def __post_init__(self):
        for name in ("lipschitz", "nonnormality", "cumulative"):
            if not getattr(self, name) >= 0.0:
                raise ValueError(f"{name} must be nonnegative")


def lipschitz_bound(layer):
    """``sup|sigma'| ||A|| + ||C||`` in spectral norms."""
    return _times(DERIVATIVE_SUP[layer.kind], spectral_norm(layer.a)) + spectral_norm(layer.c)


def _inverse_norm(cov):
    """``||cov^-1||`` via the jitter ladder; ``None`` if it stays singular."""
    for attempt in jitter_ladder(cov):
        w = np.linalg.eigvalsh(attempt)
        if w[0] > 0.0:
            try:
                np.linalg.cholesky(attempt)
            except np.linalg.LinAlgError:
                continue
            return 1.0 / w[0]
    return None


def nonnormality_bound(layer, incoming, outgoing):
    """Crude bound on ``d_W(g(Y_in), N(moments))``; returns ``(value, singular)``."""
    nu = layer.a @ incoming.cov @ layer.a.T
    nu_norm = spectral_norm(nu)
    if nu_norm == 0.0:
        return 0.0, False
    inv_norm = _inverse_norm(outgoing.cov)
    if inv_norm is None:
        return np.inf, True
    scale = (
        3.0 / _SQRT2
        * np.sqrt(layer.out_dim)
        * SECOND_DERIVATIVE_SUP[layer.kind]
        * DERIVATIVE_SUP[layer.kind]
    )
    return float(scale * inv_norm * np.sqrt(spectral_norm(outgoing.cov)) * nu_norm ** 1.5), False


def error_recursion(net, x, moments=None):
    """Chain the per-layer bounds along the analytic propagation of ``x``."""
    moments = moments if moments is not None else propagate_analytic(net, x)
    out = []
    cumulative = 0.0
    incoming = x
    for layer, outgoing in zip(net, moments):
        lip = lipschitz_bound(layer)
        nn, singular = nonnormality_bound(layer, incoming, outgoing)
        cumulative = _times(lip, cumulative) + nn
        out.append(LayerBound(lip, nn, cumulative, singular))
        incoming = outgoing
    return out

