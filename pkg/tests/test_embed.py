import numpy as np
import pytest
from hypothesis import given, strategies as st

from embedcal.embed import (
    AugmentedParams, EmbeddingSpec, SupportViolation, Variant, input_pce,
    lower_triangular_factor, param_count, sample_lambda,
)
from embedcal.pc import pce_moments


class TestParamCount:
    def test_classical(self):
        assert param_count(EmbeddingSpec("classical", 2)) == 2

    def test_triangular_d2(self):
        assert param_count(EmbeddingSpec("triangular", 2)) == 5

    def test_uniform_subset_with_sigma(self):
        assert param_count(EmbeddingSpec("uniform", 3, (0, 2)), infer_sigma=True) == 6

    def test_full_all_embedded(self):
        # every embedded parameter gets one coefficient per germ dimension
        assert param_count(EmbeddingSpec("full", 3)) == 3 + 9

    def test_full_subset_uses_germ_dim(self):
        assert param_count(EmbeddingSpec("full", 3, (0, 2))) == 3 + 4

    def test_general_order2(self):
        # 2 embedded, order 2: basis has 6 terms, 5 non-constant per parameter
        assert param_count(EmbeddingSpec("general", 2, order=2)) == 2 + 10

    @given(st.integers(1, 6))
    def test_triangular_formula(self, d):
        assert EmbeddingSpec("triangular", d).alpha_count == d * (d + 1) // 2


class TestLayout:
    def test_flat_round_trip(self):
        spec = EmbeddingSpec("triangular", 3)
        vec = np.arange(10.0)
        p = AugmentedParams.from_flat(spec, vec, infer_sigma=True)
        assert p.lam.tolist() == [0, 1, 2]
        assert p.alpha.tolist() == [3, 4, 5, 6, 7, 8]
        assert p.log_sigma == 9
        np.testing.assert_array_equal(p.flatten(), vec)

    def test_wrong_length(self):
        with pytest.raises(ValueError):
            AugmentedParams.from_flat(EmbeddingSpec("triangular", 2), np.zeros(4))

    def test_bad_embedded_set(self):
        with pytest.raises(ValueError):
            EmbeddingSpec("triangular", 2, (0, 2))


class TestInputPce:
    def test_triangular_example(self):
        spec = EmbeddingSpec("triangular", 2)
        p = AugmentedParams([1, 2], [0.5, 0.3, 0.4])
        lam1, lam2 = input_pce(spec, p)
        np.testing.assert_allclose(lam1.coeffs, [1, 0.5, 0])
        np.testing.assert_allclose(lam2.coeffs, [2, 0.3, 0.4])
        np.testing.assert_allclose(sample_lambda(spec, p, [1, 1]), [1.5, 2.7])

    def test_classical_constant(self):
        spec = EmbeddingSpec("classical", 1)
        p = AugmentedParams([7.0])
        (lam,) = input_pce(spec, p)
        assert pce_moments(lam) == (7.0, 0.0)
        np.testing.assert_array_equal(sample_lambda(spec, p, [0.3]), [7.0])

    def test_uniform_moments(self):
        spec = EmbeddingSpec("uniform", 1)
        (lam,) = input_pce(spec, AugmentedParams([0.0], [1.0]))
        mean, var = pce_moments(lam)
        assert mean == 0 and var == pytest.approx(1 / 3)

    @pytest.mark.parametrize("variant", ["full", "triangular", "uniform"])
    def test_center_returns_lambda(self, variant):
        spec = EmbeddingSpec(variant, 3)
        rng = np.random.default_rng(0)
        p = AugmentedParams(rng.normal(size=3), np.abs(rng.normal(size=spec.alpha_count)))
        np.testing.assert_allclose(sample_lambda(spec, p, np.zeros(3)), p.lam)

    def test_negative_diagonal_signals(self):
        spec = EmbeddingSpec("triangular", 2)
        with pytest.raises(SupportViolation):
            input_pce(spec, AugmentedParams([0, 0], [0.1, 0.2, -0.1]))

    def test_non_embedded_are_constant(self):
        spec = EmbeddingSpec("triangular", 3, (1,))
        pces = input_pce(spec, AugmentedParams([1, 2, 3], [0.5]))
        assert pce_moments(pces[0])[1] == 0 and pce_moments(pces[2])[1] == 0
        assert pce_moments(pces[1])[1] == pytest.approx(0.25)


class TestCovarianceProperties:
    def test_triangular_cov_is_llt(self):
        spec = EmbeddingSpec("triangular", 3)
        rng = np.random.default_rng(1)
        alpha = rng.normal(size=6)
        alpha[spec.diagonal_positions()] = np.abs(alpha[spec.diagonal_positions()])
        p = AugmentedParams(np.zeros(3), alpha)
        lmat = lower_triangular_factor(spec, p)
        assert np.allclose(np.triu(lmat, 1), 0)
        xi = rng.standard_normal((1_000_000, 3))
        samples = sample_lambda(spec, p, xi)
        cov = np.cov(samples, rowvar=False)
        target = lmat @ lmat.T
        # standard error of a sample covariance entry: sqrt((s_ii s_jj + s_ij^2) / n)
        se = np.sqrt((np.outer(np.diag(target), np.diag(target)) + target ** 2) / xi.shape[0])
        assert np.all(np.abs(cov - target) < 3 * se + 1e-12)

    def test_uniform_range(self):
        spec = EmbeddingSpec("uniform", 2)
        p = AugmentedParams([0.3, -1.0], [0.2, 0.5])
        xi = np.random.default_rng(2).uniform(-1, 1, (10000, 2))
        s = sample_lambda(spec, p, xi)
        assert np.all(s >= p.lam - p.alpha - 1e-15) and np.all(s <= p.lam + p.alpha + 1e-15)

    def test_classical_zero_variance(self):
        spec = EmbeddingSpec("classical", 4)
        for lam in input_pce(spec, AugmentedParams(np.arange(4.0))):
            assert pce_moments(lam)[1] == 0.0

    def test_variant_germ_kinds(self):
        assert EmbeddingSpec("uniform", 2).germ_kind.value == "legendre"
        assert EmbeddingSpec("triangular", 2).germ_kind.value == "hermite"
        assert EmbeddingSpec("classical", 2).variant is Variant.CLASSICAL
