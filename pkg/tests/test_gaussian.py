import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.stats import norm

from momentflow.gaussian import (
    DimensionError,
    Gaussian,
    LinearMap,
    SingularCovarianceError,
    affine_pushforward,
    cholesky,
    jitter_ladder,
    kl_divergence,
    psd_repair,
    sample,
)
from momentflow.oracle import unit_cube_points


def random_spd(rng, n):
    q = rng.normal(size=(n, n))
    return q @ q.T + 0.1 * np.eye(n)


def kl_quadrature(p, q):
    lp = norm(p.mean[0], np.sqrt(p.cov[0, 0]))
    lq = norm(q.mean[0], np.sqrt(q.cov[0, 0]))
    val, _ = quad(lambda x: lp.pdf(x) * (lp.logpdf(x) - lq.logpdf(x)), -30, 30, limit=200)
    return val


class TestGaussian:
    def test_symmetrized(self):
        g = Gaussian([0, 0], [[1.0, 0.5], [0.5 + 1e-13, 2.0]])
        np.testing.assert_array_equal(g.cov, g.cov.T)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            Gaussian([0, 0], np.eye(3))
        with pytest.raises(DimensionError):
            LinearMap(np.eye(2), [1.0, 2.0, 3.0])

    def test_immutable(self):
        g = Gaussian([1.0], [[2.0]])
        with pytest.raises(ValueError):
            g.mean[0] = 3.0
        assert g.dim == 1 and g.var[0] == 2.0

    def test_repair_on_construction(self):
        g = Gaussian([0, 0], [[1, 2], [2, 1]], repair=True)
        w = np.linalg.eigvalsh(g.cov)
        assert w[0] >= -1e-10 * w[-1]


class TestAffinePushforward:
    def test_identity(self):
        g = Gaussian(np.zeros(2), np.eye(2))
        out = affine_pushforward(g, LinearMap(np.eye(2)))
        np.testing.assert_array_equal(out.mean, g.mean)
        np.testing.assert_array_equal(out.cov, g.cov)

    def test_zero_matrix(self):
        out = affine_pushforward(Gaussian([1, 2], [[2, 1], [1, 2]]), LinearMap(np.zeros((2, 2)), [3.0, 4.0]))
        np.testing.assert_array_equal(out.mean, [3.0, 4.0])
        np.testing.assert_array_equal(out.cov, np.zeros((2, 2)))

    def test_diagonal_scaling(self):
        out = affine_pushforward(Gaussian([1, 0], np.eye(2)), LinearMap(np.diag([2.0, 3.0])))
        np.testing.assert_array_equal(out.mean, [2, 0])
        np.testing.assert_array_equal(out.cov, np.diag([4.0, 9.0]))

    def test_composition(self):
        rng = np.random.default_rng(0)
        g = Gaussian(rng.normal(size=3), random_spd(rng, 3))
        m1 = LinearMap(rng.normal(size=(4, 3)), rng.normal(size=4))
        m2 = LinearMap(rng.normal(size=(2, 4)), rng.normal(size=2))
        two = affine_pushforward(affine_pushforward(g, m1), m2)
        one = affine_pushforward(g, LinearMap(m2.matrix @ m1.matrix, m2.matrix @ m1.offset + m2.offset))
        np.testing.assert_allclose(two.mean, one.mean, atol=1e-12)
        np.testing.assert_allclose(two.cov, one.cov, atol=1e-12 * np.abs(one.cov).max())

    def test_mismatch(self):
        with pytest.raises(DimensionError):
            affine_pushforward(Gaussian([0.0], [[1.0]]), LinearMap(np.eye(2)))


class TestKL:
    def test_identical(self):
        assert kl_divergence(Gaussian([0.0], [[1.0]]), Gaussian([0.0], [[1.0]])) == 0.0

    def test_mean_shift(self):
        p, q = Gaussian([0.0], [[1.0]]), Gaussian([1.0], [[1.0]])
        np.testing.assert_allclose(kl_divergence(p, q), 0.5, rtol=1e-14)
        np.testing.assert_allclose(kl_divergence(p, q), kl_quadrature(p, q), atol=1e-9)

    def test_variance_ratio(self):
        p, q = Gaussian([0.0], [[2.0]]), Gaussian([0.0], [[1.0]])
        np.testing.assert_allclose(kl_divergence(p, q), 0.5 * (2 - 1 - np.log(2)), rtol=1e-14)
        np.testing.assert_allclose(kl_divergence(p, q), kl_quadrature(p, q), atol=1e-9)

    def test_random_pairs(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            n = rng.integers(1, 6)
            p = Gaussian(rng.normal(size=n), random_spd(rng, n))
            q = Gaussian(rng.normal(size=n), random_spd(rng, n))
            assert kl_divergence(p, q) >= 0.0
            np.testing.assert_allclose(kl_divergence(p, p), 0.0, atol=1e-10)

    def test_singular(self):
        regular = Gaussian([0.0, 0.0], np.eye(2))
        singular = Gaussian([0.0, 0.0], np.zeros((2, 2)))
        with pytest.raises(SingularCovarianceError):
            kl_divergence(regular, singular)
        assert kl_divergence(singular, regular) == np.inf

    def test_near_singular_uses_jitter(self):
        cov = np.array([[1.0, 1.0], [1.0, 1.0]])
        val = kl_divergence(Gaussian([0, 0], np.eye(2)), Gaussian([0, 0], cov))
        assert np.isfinite(val) and val > 1e3


class TestJitter:
    def test_ladder(self):
        cov = np.diag([2.0, 0.0])
        steps = list(jitter_ladder(cov))
        assert len(steps) == 8
        np.testing.assert_array_equal(steps[0], cov)
        np.testing.assert_allclose(np.diag(steps[1])[1], 1e-12, rtol=1e-12)
        np.testing.assert_allclose(np.diag(steps[-1])[1], 1e-6, rtol=1e-12)

    def test_cholesky_zero_and_singular(self):
        np.testing.assert_array_equal(cholesky(np.zeros((2, 2))), np.zeros((2, 2)))
        chol = cholesky(np.ones((2, 2)))
        np.testing.assert_allclose(chol @ chol.T, np.ones((2, 2)), atol=1e-5)
        with pytest.raises(SingularCovarianceError):
            cholesky(np.diag([1.0, -1.0]))


class TestSample:
    def test_medians(self):
        assert sample(Gaussian([0.0], [[1.0]]), [0.5])[0] == 0.0
        assert sample(Gaussian([3.0], [[4.0]]), [0.5])[0] == 3.0
        np.testing.assert_allclose(sample(Gaussian([0.0], [[1.0]]), [norm.cdf(1.0)])[0], 1.0, atol=1e-9)

    def test_rejects_boundary(self):
        with pytest.raises(ValueError):
            sample(Gaussian([0.0], [[1.0]]), [0.0])
        with pytest.raises(DimensionError):
            sample(Gaussian([0.0], [[1.0]]), [[0.5, 0.5]])

    def test_low_discrepancy_moments(self):
        rng = np.random.default_rng(2)
        g = Gaussian(rng.normal(size=3), random_spd(rng, 3))
        x = sample(g, unit_cube_points(3, 2 ** 14, seed=7))
        n = x.shape[0]
        se_mean = np.sqrt(np.diag(g.cov) / n)
        assert np.all(np.abs(x.mean(axis=0) - g.mean) <= 3 * se_mean)
        emp = np.cov(x, rowvar=False)
        var = np.diag(g.cov)
        se_cov = np.sqrt((g.cov ** 2 + np.outer(var, var)) / n)
        assert np.all(np.abs(emp - g.cov) <= 3 * se_cov)


class TestPsdRepair:
    def test_examples(self):
        np.testing.assert_array_equal(psd_repair(np.eye(2)), np.eye(2))
        np.testing.assert_allclose(psd_repair(np.diag([1.0, -1e-14])), np.diag([1.0, 0.0]), atol=1e-30)
        out = psd_repair(np.array([[1.0, 2.0], [2.0, 1.0]]))
        np.testing.assert_allclose(np.linalg.eigvalsh(out), [0.0, 3.0], atol=1e-14)
        np.testing.assert_allclose(out, 1.5 * np.ones((2, 2)), atol=1e-14)

    @settings(max_examples=100, deadline=None)
    @given(st.integers(1, 6), st.integers(0, 2 ** 32 - 1))
    def test_idempotent_and_valid(self, n, seed):
        s = np.random.default_rng(seed).normal(size=(n, n))
        s = s + s.T
        once = psd_repair(s)
        np.testing.assert_allclose(psd_repair(once), once, atol=1e-12 * max(1.0, np.abs(once).max()))
        w = np.linalg.eigvalsh(once)
        assert w[0] >= -1e-10 * max(w[-1], 1e-300)
        Gaussian(np.zeros(n), once)
