import numpy as np
import pytest
from scipy.stats import norm, wasserstein_distance

from momentflow.ensembles import linear_layer
from momentflow.fixtures import heaviside_network
from momentflow.gaussian import Gaussian
from momentflow.network import LayerParams, Network
from momentflow.oracle import (
    SampleSet,
    evaluate_method,
    evaluate_pseudo_true,
    histogram,
    pseudo_true,
    qmc_sample_network,
    quantile_grid,
    unit_cube_points,
    wasserstein_1d,
)
from momentflow.propagation import propagate_analytic


def identity_network(n=1):
    return Network([linear_layer(np.eye(n), np.zeros(n), "sine")])


class TestSampling:
    def test_points_inside_open_cube(self):
        u = unit_cube_points(4, 2 ** 10, seed=0)
        assert u.shape == (1024, 4)
        assert np.all(u > 0.0) and np.all(u < 1.0)

    def test_power_of_two(self):
        with pytest.raises(ValueError):
            unit_cube_points(1, 1000, seed=0)
        with pytest.raises(ValueError):
            SampleSet(np.zeros((3, 1)), 0, 0)
        with pytest.raises(ValueError):
            SampleSet(np.full((4, 1), np.inf), 0, 0)

    def test_deterministic(self):
        x = Gaussian([0.0, 1.0], [[1.0, 0.3], [0.3, 2.0]])
        net = Network([LayerParams(np.eye(2), [0.1, 0.2], np.eye(2), [0, 0], "gelu")])
        a = qmc_sample_network(net, x, 2 ** 10, seed=5, replicate_id=3)
        b = qmc_sample_network(net, x, 2 ** 10, seed=5, replicate_id=3)
        np.testing.assert_array_equal(a.samples, b.samples)
        c = qmc_sample_network(net, x, 2 ** 10, seed=5, replicate_id=4)
        assert not np.array_equal(a.samples, c.samples)

    def test_identity_network_mean(self):
        s = qmc_sample_network(identity_network(), Gaussian([0.0], [[1.0]]), 2 ** 14, seed=1)
        assert abs(s.samples.mean()) <= 3 / np.sqrt(2 ** 14)

    def test_affine_network_cov(self):
        rng = np.random.default_rng(0)
        c = rng.normal(size=(2, 3))
        net = Network([linear_layer(c, [1.0, -1.0], "probit")])
        x = Gaussian(np.zeros(3), np.eye(3))
        s = qmc_sample_network(net, x, 2 ** 14, seed=2)
        exact = c @ c.T
        emp = np.cov(s.samples, rowvar=False)
        var = np.diag(exact)
        se = np.sqrt((exact ** 2 + np.outer(var, var)) / 2 ** 14)
        assert np.all(np.abs(emp - exact) <= 3 * se)

    def test_heaviside_network_all_zero(self):
        s = qmc_sample_network(heaviside_network(alpha=50.0), Gaussian([0.0], [[1.0]]), 2 ** 12, seed=0)
        assert np.all(s.samples == 0.0)


class TestPseudoTrue:
    def test_constant(self):
        g = pseudo_true(np.full((8, 1), 2.5))
        assert g.mean[0] == 2.5 and g.cov[0, 0] == 0.0

    def test_two_points(self):
        g = pseudo_true(np.array([[-1.0], [1.0]]))
        assert g.mean[0] == 0.0 and g.cov[0, 0] == 2.0
        with pytest.raises(ValueError):
            pseudo_true(np.array([[1.0]]))

    def test_recovers_gaussian(self):
        x = Gaussian([1.0, -2.0], [[2.0, 0.5], [0.5, 1.0]])
        g = pseudo_true(qmc_sample_network(identity_network(2), x, 2 ** 14, seed=4))
        se = np.sqrt(np.diag(x.cov) / 2 ** 14)
        assert np.all(np.abs(g.mean - x.mean) <= 3 * se)


class TestWasserstein:
    def test_exact_grid_is_zero(self):
        g = Gaussian([0.3], [[2.0]])
        assert wasserstein_1d(g, quantile_grid(g, 1024)) == 0.0

    def test_single_median(self):
        assert wasserstein_1d(Gaussian([0.0], [[1.0]]), [0.0]) == 0.0

    def test_mean_shift(self):
        s = qmc_sample_network(identity_network(), Gaussian([0.0], [[1.0]]), 2 ** 12, seed=0)
        w = wasserstein_1d(Gaussian([1.0], [[1.0]]), np.sort(s.samples[:, 0]))
        assert abs(w - 1.0) < 0.02

    def test_zero_variance(self):
        y = np.array([-1.0, 0.0, 2.0])
        assert wasserstein_1d(Gaussian([0.5], [[0.0]]), y) == np.mean(np.abs(y - 0.5))

    def test_rejects_unsorted_and_multivariate(self):
        with pytest.raises(ValueError, match="sorted"):
            wasserstein_1d(Gaussian([0.0], [[1.0]]), [1.0, 0.0])
        with pytest.raises(ValueError):
            wasserstein_1d(Gaussian([0.0, 0.0], np.eye(2)), [0.0])

    @pytest.mark.parametrize("target,source", [((0.0, 1.0), (0.5, 1.0)), ((0.0, 1.0), (0.0, 4.0)), ((1.0, 0.25), (-1.0, 2.0))])
    def test_converges_to_gaussian_w1(self, target, source):
        s = qmc_sample_network(identity_network(), Gaussian([source[0]], [[source[1]]]), 2 ** 16, seed=3)
        w = wasserstein_1d(Gaussian([target[0]], [[target[1]]]), np.sort(s.samples[:, 0]))
        # closed form: integral of |Q1 - Q2| over (0, 1) on a fine midpoint grid
        p = (np.arange(2 ** 20) + 0.5) / 2 ** 20
        q1 = target[0] + np.sqrt(target[1]) * norm.ppf(p)
        q2 = source[0] + np.sqrt(source[1]) * norm.ppf(p)
        exact = np.mean(np.abs(q1 - q2))
        assert abs(w - exact) <= 0.01 * exact

    def test_agrees_with_scipy_on_grid_measure(self):
        g = Gaussian([0.2], [[1.5]])
        y = np.sort(np.random.default_rng(0).normal(size=512))
        grid = quantile_grid(g, 512)
        np.testing.assert_allclose(wasserstein_1d(g, y), wasserstein_distance(y, grid), rtol=1e-12)


class TestEvaluateMethod:
    def replicates(self, net, x, count, n=2 ** 12):
        return [qmc_sample_network(net, x, n, seed=9, replicate_id=r) for r in range(count)]

    def test_pooled_truth_has_small_kl(self):
        net = Network([LayerParams([[1.0]], [0.2], [[0.5]], [0.0], "sine")])
        x = Gaussian([0.0], [[1.0]])
        reps = self.replicates(net, x, 5)
        pooled = evaluate_pseudo_true(reps).moments
        rep = evaluate_method(pooled, reps)
        assert rep.kl_from_pseudo_true.value < 1e-4
        assert rep.kl_to_pseudo_true.value < 1e-4

    def test_affine_truth_wasserstein(self):
        net = Network([linear_layer([[2.0]], [1.0], "probit")])
        x = Gaussian([0.0], [[1.0]])
        reps = self.replicates(net, x, 10)
        truth = propagate_analytic(net, x)[-1]
        own = evaluate_pseudo_true(reps).wasserstein_to_truth.value
        assert evaluate_method(truth, reps).wasserstein_to_truth.value <= 2 * own

    def test_standard_error_scaling(self):
        net = Network([LayerParams([[1.0]], [0.0], [[0.0]], [0.0], "gelu")])
        x = Gaussian([0.0], [[1.0]])
        reps = self.replicates(net, x, 20)
        approx = Gaussian([0.3], [[0.5]])
        se5 = evaluate_method(approx, reps[:5]).kl_from_pseudo_true.se
        se20 = evaluate_method(approx, reps).kl_from_pseudo_true.se
        ratio = se5 / se20
        assert 2 / 2.5 <= ratio <= 2 * 2.5

    def test_singular_approximation_gives_inf(self):
        net = Network([LayerParams([[1.0]], [0.0], [[0.0]], [0.0], "sine")])
        reps = self.replicates(net, Gaussian([0.0], [[1.0]]), 3)
        rep = evaluate_method(Gaussian([0.0], [[0.0]]), reps)
        assert rep.kl_from_pseudo_true.value == np.inf
        assert rep.kl_to_pseudo_true.value == np.inf
        assert rep.kl_from_pseudo_true.se == 0.0

    def test_multivariate_rejected(self):
        net = Network([LayerParams(np.eye(2), np.zeros(2), np.zeros((2, 2)), np.zeros(2), "sine")])
        reps = self.replicates(net, Gaussian(np.zeros(2), np.eye(2)), 2)
        with pytest.raises(ValueError, match="scalar"):
            evaluate_method(Gaussian(np.zeros(2), np.eye(2)), reps)


class TestHistogram:
    def test_fifty_bins(self):
        counts, edges = histogram(np.linspace(0, 1, 1000))
        assert counts.size == 50 and edges.size == 51 and counts.sum() == 1000
