"""Scalar special functions of the standard normal law.

Everything here broadcasts over numpy arrays. Correlations are clamped to
``[-1 + RHO_EPS, 1 - RHO_EPS]`` before any ``sqrt(1 - rho**2)``.
"""

import numpy as np
from scipy.special import ndtr, ndtri

RHO_EPS = 1e-12
_TWO_PI = 2.0 * np.pi
_INV_SQRT_2PI = 1.0 / np.sqrt(_TWO_PI)

# 10-point Gauss-Legendre rule on [-1, 1] (positive half; the rule is symmetric).
_GL10_X = np.array([
    0.1488743389816312108848260,
    0.4333953941292471907992659,
    0.6794095682990244062343274,
    0.8650633666889845107320967,
    0.9739065285171717200779640,
])
_GL10_W = np.array([
    0.2955242247147528701738930,
    0.2692667193099963550912269,
    0.2190863625159820439955349,
    0.1494513491505805931457763,
    0.0666713443086881375935688,
])
GL10_NODES = np.concatenate([-_GL10_X[::-1], _GL10_X])
GL10_WEIGHTS = np.concatenate([_GL10_W[::-1], _GL10_W])

_GL20_NODES, _GL20_WEIGHTS = np.polynomial.legendre.leggauss(20)
_GL31_NODES, _GL31_WEIGHTS = np.polynomial.legendre.leggauss(31)

# Above this |rho| the arcsine-form integrand develops a boundary layer and
# the high-correlation expansion takes over.
_HIGH_CORRELATION = 0.925


def clamp_rho(rho):
    return np.clip(rho, -1.0 + RHO_EPS, 1.0 - RHO_EPS)


def perfect_correlation(rho):
    """Mask of correlations evaluated at the degenerate ``+-1`` limit."""
    return np.abs(clamp_rho(rho)) >= 1.0 - 2.0 * RHO_EPS


def phi(x):
    """Standard normal density."""
    x = np.asarray(x, dtype=float)
    return _INV_SQRT_2PI * np.exp(-0.5 * x * x)


def Phi(x):
    """Standard normal CDF."""
    return ndtr(x)


def Phi_inv(p):
    """Standard normal quantile function."""
    return ndtri(p)


def _delta_arcsine(h, k, rho, panels=2):
    # Phi2(h,k;rho) - Phi2(h,k;0) = int_0^rho d/dr Phi2(h,k;r) dr, with r = sin(t)
    # removing the 1/sqrt(1-r^2) factor from the integrand.
    top = np.arcsin(rho)[..., None]
    hs = (0.5 * (h * h + k * k))[..., None]
    hk = (h * k)[..., None]
    total = 0.0
    width = top / panels
    for p in range(panels):
        t = width * (p + 0.5 * (1.0 + GL10_NODES))
        s = np.sin(t)
        total = total + np.sum(GL10_WEIGHTS * np.exp((s * hk - hs) / (1.0 - s * s)), axis=-1)
    return total * (0.5 * width[..., 0]) / _TWO_PI


def _upper_orthant_high(h, k, r):
    """P(Z1 > h, Z2 > k) for |r| >= 0.925 (Drezner-Wesolowsky / Genz)."""
    neg = r < 0
    k = np.where(neg, -k, k)
    hk = h * k
    as_ = (1.0 - r) * (1.0 + r)
    a = np.sqrt(as_)
    bs = (h - k) ** 2
    asr = -0.5 * (bs / as_ + hk)
    c = (4.0 - hk) / 8.0
    d = (12.0 - hk) / 80.0
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        bvn = np.where(
            asr > -100.0,
            a * np.exp(asr) * (1.0 - c * (bs - as_) * (1.0 - d * bs) / 3.0 + c * d * as_ * as_),
            0.0,
        )
        b = np.sqrt(bs)
        sp = np.sqrt(_TWO_PI) * ndtr(-b / a)
        bvn = np.where(
            hk > -100.0,
            bvn - np.exp(-0.5 * hk) * sp * b * (1.0 - c * bs * (1.0 - d * bs) / 3.0),
            bvn,
        )
        half = 0.5 * a
        xs = (half[..., None] * (1.0 + _GL20_NODES)) ** 2
        asr2 = -0.5 * (bs[..., None] / xs + hk[..., None])
        sp2 = 1.0 + c[..., None] * xs * (1.0 + 5.0 * d[..., None] * xs)
        rs = np.sqrt(1.0 - xs)
        ep = np.exp(-0.5 * hk[..., None] * xs / (1.0 + rs) ** 2) / rs
        terms = np.where(asr2 > -100.0, np.exp(asr2) * (sp2 - ep), 0.0)
        bvn = (half * np.sum(_GL20_WEIGHTS * terms, axis=-1) - bvn) / _TWO_PI
    pos_part = bvn + ndtr(-np.maximum(h, k))
    gap = np.where(h < 0, ndtr(k) - ndtr(h), ndtr(-h) - ndtr(-k))
    neg_part = np.where(h >= k, -bvn, gap - bvn)
    return np.where(neg, neg_part, pos_part)


def Phi2_delta(h, k, rho):
    """``Phi2(h, k; rho) - Phi(h) Phi(k)`` without forming the difference.

    For moderate correlation the Drezner derivative is integrated from 0 to
    ``rho`` by Gauss-Legendre quadrature in the arcsine variable; above
    ``|rho| = 0.925`` the Genz high-correlation expansion is used, and
    correlations within ``2 * RHO_EPS`` of +-1 take the degenerate limit.
    """
    h, k, rho = np.broadcast_arrays(
        np.asarray(h, dtype=float), np.asarray(k, dtype=float), np.asarray(rho, dtype=float)
    )
    rho = clamp_rho(rho)
    moderate = np.abs(rho) <= _HIGH_CORRELATION
    # at the clamp the error of the clamped value is O(sqrt(RHO_EPS)); use the exact limit
    perfect = perfect_correlation(rho)
    out = np.empty(h.shape)
    if np.any(moderate):
        out[moderate] = _delta_arcsine(h[moderate], k[moderate], rho[moderate])
    if np.any(perfect):
        hh, kk = h[perfect], k[perfect]
        limit = np.where(
            rho[perfect] > 0, ndtr(np.minimum(hh, kk)), np.maximum(0.0, ndtr(hh) - ndtr(-kk))
        )
        out[perfect] = limit - ndtr(hh) * ndtr(kk)
    high = ~(moderate | perfect)
    if np.any(high):
        hh, kk = h[high], k[high]
        out[high] = _upper_orthant_high(-hh, -kk, rho[high]) - ndtr(hh) * ndtr(kk)
    return out if out.ndim else out[()]


def Phi2(h, k, rho):
    """Bivariate standard normal CDF ``P(Z1 <= h, Z2 <= k)``, corr ``rho``."""
    val = ndtr(h) * ndtr(k) + Phi2_delta(h, k, rho)
    return np.clip(val, 0.0, 1.0)


def Phi2_1(h, k, rho):
    """Partial derivative of ``Phi2`` in its first argument."""
    rho = clamp_rho(np.asarray(rho, dtype=float))
    return phi(h) * ndtr((k - rho * h) / np.sqrt((1.0 - rho) * (1.0 + rho)))


def phi2(h, k, rho):
    """Bivariate standard normal density with correlation ``rho``."""
    h = np.asarray(h, dtype=float)
    k = np.asarray(k, dtype=float)
    rho = clamp_rho(np.asarray(rho, dtype=float))
    omr2 = (1.0 - rho) * (1.0 + rho)
    return np.exp(-(h * h + k * k - 2.0 * rho * h * k) / (2.0 * omr2)) / (_TWO_PI * np.sqrt(omr2))


def _owens_t_small_a(h, a, panels=2):
    # |a| <= 1, a >= 0: direct Gauss-Legendre on the defining integral.
    total = 0.0
    width = a / panels
    for p in range(panels):
        x = width[..., None] * (p + 0.5 * (1.0 + _GL31_NODES))
        onepx2 = 1.0 + x * x
        total = total + np.sum(
            _GL31_WEIGHTS * np.exp(-0.5 * (h * h)[..., None] * onepx2) / onepx2, axis=-1
        )
    return total * 0.5 * width / _TWO_PI


def owens_t(h, a):
    """Owen's T function ``T(h, a)``.

    Uses fixed 31-node Gauss-Legendre panels on ``[0, |a|]`` for ``|a| <= 1``
    and the reciprocal-argument identity otherwise. Even in ``h``, odd in ``a``.
    """
    h, a = np.broadcast_arrays(np.asarray(h, dtype=float), np.asarray(a, dtype=float))
    sign = np.sign(a)
    h = np.abs(h)
    a = np.abs(a)
    out = np.empty(h.shape)
    small = a <= 1.0
    if np.any(small):
        out[small] = _owens_t_small_a(h[small], a[small])
    big = ~small
    if np.any(big):
        hb, ab = h[big], a[big]
        ah = ab * hb
        finite = np.isfinite(ab)
        inv = np.where(finite, 1.0 / np.where(finite, ab, 1.0), 0.0)
        ph, pah = ndtr(hb), ndtr(ah)
        out[big] = 0.5 * ph + 0.5 * pah - ph * pah - _owens_t_small_a(ah, inv)
        # T(0, a) reduces exactly to atan(a) / 2pi.
        zero = hb == 0.0
        if np.any(zero):
            out[big] = np.where(zero, np.arctan(ab) / _TWO_PI, out[big])
    out = sign * out
    return out if out.ndim else out[()]
