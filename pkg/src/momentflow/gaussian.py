"""Gaussian values, affine pushforward, sampling and KL divergence."""

from dataclasses import dataclass

import numpy as np

from .special import Phi_inv

JITTER_START = 1e-12
JITTER_STOP = 1e-6


class DimensionError(ValueError):
    """Shapes of vectors/matrices do not line up."""


class SingularCovarianceError(np.linalg.LinAlgError):
    """A covariance stayed non positive definite through the jitter ladder."""


def symmetrize(s):
    s = np.asarray(s, dtype=float)
    return 0.5 * (s + s.T)


def psd_repair(cov):
    """Clip negative eigenvalues of a symmetric matrix at zero."""
    cov = symmetrize(np.atleast_2d(cov))
    if cov.shape[0] != cov.shape[1]:
        raise DimensionError(f"expected a square matrix, got {cov.shape}")
    if cov.size == 0:
        return cov
    w, v = np.linalg.eigh(cov)
    if w[0] >= 0.0:
        return cov
    w = np.maximum(w, 0.0)
    return symmetrize((v * w) @ v.T)


@dataclass(frozen=True, eq=False)
class Gaussian:
    """Multivariate normal ``N(mean, cov)``.

    The covariance is symmetrized on construction; ``repair=True`` also
    clips negative eigenvalues.
    """

    mean: np.ndarray
    cov: np.ndarray

    def __init__(self, mean, cov, repair=False):
        mean = np.atleast_1d(np.asarray(mean, dtype=float)).copy()
        cov = np.atleast_2d(np.asarray(cov, dtype=float))
        if mean.ndim != 1:
            raise DimensionError(f"mean must be a vector, got shape {mean.shape}")
        if cov.shape != (mean.size, mean.size):
            raise DimensionError(
                f"covariance shape {cov.shape} does not match mean length {mean.size}"
            )
        cov = psd_repair(cov) if repair else symmetrize(cov)
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self):
        return self.mean.size

    @property
    def var(self):
        return np.diag(self.cov).copy()

    def __repr__(self):
        return f"Gaussian(mean={self.mean.tolist()}, cov={self.cov.tolist()})"


@dataclass(frozen=True, eq=False)
class LinearMap:
    """``x -> matrix @ x + offset``."""

    matrix: np.ndarray
    offset: np.ndarray

    def __init__(self, matrix, offset=None):
        matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
        if offset is None:
            offset = np.zeros(matrix.shape[0])
        offset = np.atleast_1d(np.asarray(offset, dtype=float))
        if offset.shape != (matrix.shape[0],):
            raise DimensionError(
                f"offset length {offset.size} does not match {matrix.shape[0]} matrix rows"
            )
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "offset", offset)


def affine_pushforward(g, linear_map):
    """Exact law of ``M X + c`` for ``X ~ g``."""
    m = linear_map.matrix
    if m.shape[1] != g.dim:
        raise DimensionError(f"map expects input dim {m.shape[1]}, Gaussian has dim {g.dim}")
    return Gaussian(m @ g.mean + linear_map.offset, m @ g.cov @ m.T)


def jitter_ladder(cov):
    """Yield ``cov`` then ``cov + eps*I`` for the escalating jitter levels."""
    cov = np.asarray(cov, dtype=float)
    n = cov.shape[0]
    yield cov
    scale = np.trace(cov) / n if n else 0.0
    if not scale > 0.0:
        return
    eps = JITTER_START
    eye = np.eye(n)
    while eps <= JITTER_STOP * (1 + 1e-9):
        yield cov + (eps * scale) * eye
        eps *= 10.0


def cholesky(cov):
    """Lower Cholesky factor, escalating a diagonal jitter on failure."""
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    if not np.any(cov):
        return np.zeros_like(cov)
    for attempt in jitter_ladder(cov):
        try:
            return np.linalg.cholesky(attempt)
        except np.linalg.LinAlgError:
            continue
    raise SingularCovarianceError("Cholesky factorization failed after the jitter ladder")


def _logdet_and_factor(cov):
    for attempt in jitter_ladder(cov):
        try:
            chol = np.linalg.cholesky(attempt)
        except np.linalg.LinAlgError:
            continue
        return 2.0 * np.sum(np.log(np.diag(chol))), chol
    raise SingularCovarianceError("covariance is singular after the jitter ladder")


def kl_divergence(p, q):
    """``KL(p || q)`` between two Gaussians of the same dimension.

    Raises ``SingularCovarianceError`` if ``q.cov`` cannot be factored. A
    singular ``p`` against a regular ``q`` gives ``inf``.
    """
    if p.dim != q.dim:
        raise DimensionError(f"dimension mismatch: {p.dim} vs {q.dim}")
    n = p.dim
    logdet_q, lq = _logdet_and_factor(q.cov)
    try:
        logdet_p, _ = _logdet_and_factor(p.cov)
    except SingularCovarianceError:
        return np.inf
    sol = np.linalg.solve(lq, np.linalg.solve(lq, p.cov).T)  # L^-1 p L^-T
    trace = np.trace(sol)
    diff = np.linalg.solve(lq, q.mean - p.mean)
    kl = 0.5 * (trace + diff @ diff - n + logdet_q - logdet_p)
    return max(float(kl), 0.0)


def sample(g, u):
    """Map unit-cube points ``u`` (shape ``(n,)`` or ``(N, n)``) to draws of ``g``."""
    u = np.asarray(u, dtype=float)
    if u.shape[-1] != g.dim:
        raise DimensionError(f"points have dim {u.shape[-1]}, Gaussian has dim {g.dim}")
    if np.any(u <= 0.0) or np.any(u >= 1.0):
        raise ValueError("unit-cube points must lie strictly inside (0, 1)")
    z = Phi_inv(u)
    return g.mean + z @ cholesky(g.cov).T
