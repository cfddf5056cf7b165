import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from embedcal.likelihood import (
    Dataset, DegenerateLikelihoodError, LikelihoodSpec, loglik_abc, loglik_classical,
    loglik_ic_kde, loglik_independent_normal, loglik_joint_kde, loglik_mvn,
)

LOG2PI = math.log(2 * math.pi)


class TestIndependentNormal:
    def test_centered(self):
        assert loglik_independent_normal([1.0], [1.0], [1.0]) == pytest.approx(-0.5 * LOG2PI)

    def test_two_points(self):
        got = loglik_independent_normal([0, 0], [1, 2], [0, 0])
        assert got == pytest.approx(-LOG2PI - math.log(2))

    def test_three_sigma_residual(self):
        base = loglik_independent_normal([0.0], [1.0], [0.0])
        assert loglik_independent_normal([0.0], [1.0], [3.0]) - base == pytest.approx(-4.5)

    def test_matches_scipy(self):
        rng = np.random.default_rng(0)
        mu, sd, y = rng.normal(size=5), rng.uniform(0.5, 2, 5), rng.normal(size=5)
        assert loglik_independent_normal(mu, sd, y) == pytest.approx(stats.norm.logpdf(y, mu, sd).sum())

    def test_degenerate(self):
        with pytest.raises(DegenerateLikelihoodError, match="degenerate predictive variance"):
            loglik_independent_normal([0, 0], [1, 0], [0, 0])

    @given(st.permutations(list(range(6))))
    def test_permutation_invariance(self, perm):
        rng = np.random.default_rng(1)
        mu, sd, y = rng.normal(size=6), rng.uniform(0.5, 2, 6), rng.normal(size=6)
        p = np.array(perm)
        assert loglik_independent_normal(mu[p], sd[p], y[p]) == pytest.approx(
            loglik_independent_normal(mu, sd, y), rel=1e-12)

    def test_equals_classical_when_no_model_error(self):
        pred, y = np.array([0.1, 0.4, -0.2]), np.array([0.0, 0.5, 0.0])
        assert loglik_independent_normal(pred, np.full(3, 0.3), y) == loglik_classical(pred, y, 0.3)


class TestAbc:
    def test_perfect_match(self):
        eps = 0.01
        got = loglik_abc([1, 2, 3], [0, 0, 0], [1, 2, 3], eps, 1.0)
        assert got == pytest.approx(-3 * math.log(eps * math.sqrt(2 * math.pi)))

    def test_arithmetic(self):
        eps = 0.1
        got = loglik_abc([0.1], [0.1], [0.0], eps, 1.0) + math.log(eps * math.sqrt(2 * math.pi))
        assert got == pytest.approx(-0.5)

    def test_bad_epsilon(self):
        with pytest.raises(ValueError):
            loglik_abc([0], [0], [0], 0.0, 1.0)

    @given(st.floats(0, 5), st.floats(0, 5), st.floats(0.1, 3))
    def test_monotone_on_constraint(self, d1, d2, gamma):
        lo, hi = sorted([d1, d2])
        a = loglik_abc([lo], [gamma * lo], [0.0], 0.1, gamma)
        b = loglik_abc([hi], [gamma * hi], [0.0], 0.1, gamma)
        assert b <= a + 1e-12


class TestClassical:
    def test_perfect(self):
        assert loglik_classical([1, 2, 3], [1, 2, 3], 1.0) == pytest.approx(-1.5 * LOG2PI)

    def test_doubling_sigma(self):
        y = [0.0, 1.0, 2.0, 3.0]
        diff = loglik_classical(y, y, 2.0) - loglik_classical(y, y, 1.0)
        assert diff == pytest.approx(-4 * math.log(2))

    def test_nonpositive_sigma(self):
        with pytest.raises(ValueError):
            loglik_classical([0], [0], 0.0)


class TestKde:
    def test_all_samples_at_data(self):
        h = np.tile([1.0, 2.0], (200, 1))
        w = 0.3
        assert loglik_ic_kde(h, [1.0, 2.0], w) == pytest.approx(2 * math.log(1 / (w * math.sqrt(2 * math.pi))))

    def test_two_kernels(self):
        h = np.array([[-1.0], [1.0]] * 50)
        assert loglik_ic_kde(h, [0.0], 1.0) == pytest.approx(math.log(math.exp(-0.5) / math.sqrt(2 * math.pi)))

    def test_gaussian_density_oracle(self):
        h = np.random.default_rng(0).standard_normal((100_000, 1))
        for y in (-1.0, 0.0, 0.5, 1.5):
            est = math.exp(loglik_ic_kde(h, [y]))
            assert est == pytest.approx(stats.norm.pdf(y), rel=0.05)

    def test_converges_in_r(self):
        rng = np.random.default_rng(1)
        h = rng.standard_normal((200_000, 3)) * [1.0, 0.5, 2.0]
        y = [0.3, -0.2, 1.0]
        a, b = loglik_ic_kde(h[:100_000], y), loglik_ic_kde(h, y)
        assert abs(a - b) < 0.01 * abs(b)

    def test_degenerate_marginal(self):
        h = np.ones((150, 2))
        h[:, 1] = np.linspace(0, 1, 150)
        with pytest.raises(DegenerateLikelihoodError, match="degenerate marginal"):
            loglik_ic_kde(h, [1.0, 0.5])

    def test_too_few_samples(self):
        with pytest.raises(ValueError):
            loglik_ic_kde(np.random.default_rng(0).normal(size=(50, 1)), [0.0])

    def test_joint_factorizes_for_independent_columns(self):
        h = np.random.default_rng(2).standard_normal((100_000, 2))
        y = [0.2, -0.4]
        assert loglik_joint_kde(h, y) == pytest.approx(loglik_ic_kde(h, y), rel=0.02)


class TestMvn:
    def test_scalar_matches_normal(self):
        h = np.random.default_rng(3).normal(1.0, 2.0, (100_000, 1))
        got = loglik_mvn(h, [0.5])
        assert got == pytest.approx(loglik_independent_normal([1.0], [2.0], [0.5]), abs=0.01)

    def test_identical_columns_degenerate(self):
        col = np.random.default_rng(4).normal(size=(500, 1))
        with pytest.raises(DegenerateLikelihoodError), pytest.warns(RuntimeWarning):
            loglik_mvn(np.hstack([col, col]), [0.0, 0.0], nugget=0.0)

    def test_diagonal_matches_product_of_marginals(self):
        rng = np.random.default_rng(5)
        sd = np.array([0.5, 1.0, 2.0])
        h = rng.standard_normal((100_000, 3)) * sd
        y = np.array([0.1, -0.5, 1.0])
        want = stats.norm.logpdf(y, 0, sd).sum()
        assert loglik_mvn(h, y) == pytest.approx(want, rel=0.02)

    def test_needs_samples_or_nugget(self):
        with pytest.raises(DegenerateLikelihoodError):
            loglik_mvn(np.random.default_rng(6).normal(size=(3, 5)), np.zeros(5), nugget=0.0)


class TestSpecs:
    def test_validation(self):
        with pytest.raises(ValueError):
            LikelihoodSpec("abc", epsilon=0.0)
        with pytest.raises(ValueError):
            LikelihoodSpec("abc", gamma=-1.0)
        with pytest.raises(ValueError):
            LikelihoodSpec("kde", samples=50)
        assert LikelihoodSpec("independent_normal").infer_sigma
        assert not LikelihoodSpec("independent_normal", sigma=0.1).infer_sigma

    def test_dataset(self):
        d = Dataset([0.0, 1.0], [1.0, 2.0])
        assert d.n == 2 and d.xs.shape == (2, 1)
        with pytest.raises(ValueError):
            Dataset([0.0, 1.0], [1.0])
