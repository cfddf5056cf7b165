import numpy as np
import pytest

from embedcal.embed import AugmentedParams, EmbeddingSpec, sample_lambda
from embedcal.nisp import (
    FunctionModel, ModelEvaluationError, nisp_project, predictive_moments,
)


def passthrough():
    return FunctionModel(lambda xs, lams: np.repeat(lams[:, :1], xs.shape[0], axis=1), 1,
                         vectorized=True)


def square():
    return FunctionModel(lambda x, lam: lam[0] ** 2, 1)


def poly_model(deg):
    """f(x; l1, l2) = sum over i+j <= deg of x-weighted monomials."""
    def f(xs, lams):
        x = xs[:, 0][None, :]
        l1, l2 = lams[:, :1], lams[:, 1:2]
        out = np.zeros((lams.shape[0], xs.shape[0]))
        for i in range(deg + 1):
            for j in range(deg + 1 - i):
                out += (1 + x) ** (i + j) * l1 ** i * l2 ** j / (1 + i + j)
        return out
    return FunctionModel(f, 2, vectorized=True)


XS = np.array([[0.0], [0.5], [1.0]])


def test_linear_passthrough():
    spec = EmbeddingSpec("triangular", 1)
    out = nisp_project(passthrough(), XS, spec, AugmentedParams([1.5], [0.3]), 1)
    np.testing.assert_allclose(out.coeffs, [[1.5, 0.3]] * 3, atol=1e-14)


def test_square_analytic():
    mu, a = 0.8, 0.6
    spec = EmbeddingSpec("triangular", 1)
    out = nisp_project(square(), XS[:1], spec, AugmentedParams([mu], [a]), 2)
    np.testing.assert_allclose(out.coeffs[0], [mu ** 2 + a ** 2, 2 * mu * a, a ** 2], atol=1e-13)


def test_classical_single_coefficient():
    spec = EmbeddingSpec("classical", 2)
    model = poly_model(2)
    lam = np.array([0.3, -0.2])
    out = nisp_project(model, XS, spec, AugmentedParams(lam), 3)
    assert out.coeffs.shape == (3, 1)
    np.testing.assert_allclose(out.mean, model.evaluate(XS, lam[None])[0])
    np.testing.assert_array_equal(out.variance, 0.0)


@pytest.mark.parametrize("variant", ["triangular", "full", "uniform"])
@pytest.mark.parametrize("deg", [1, 2, 3])
def test_polynomial_exactness(variant, deg):
    spec = EmbeddingSpec(variant, 2)
    rng = np.random.default_rng(deg)
    alpha = np.abs(rng.normal(0.3, 0.1, spec.alpha_count))
    p = AugmentedParams([0.4, -0.3], alpha)
    model = poly_model(deg)
    out = nisp_project(model, XS, spec, p, deg, deg + 1)
    germ = (rng.standard_normal((100, 2)) if variant != "uniform"
            else rng.uniform(-1, 1, (100, 2)))
    direct = model.evaluate(XS, sample_lambda(spec, p, germ))
    approx = out.sample(0, None, germ=germ)
    np.testing.assert_allclose(approx, direct, rtol=1e-9, atol=1e-12)


def test_too_few_points():
    with pytest.raises(ValueError):
        nisp_project(square(), XS, EmbeddingSpec("triangular", 1), AugmentedParams([1], [1]), 2, 2)


def test_node_failure_identified():
    def f(x, lam):
        if lam[0] > 1.0:
            raise ArithmeticError("blow-up")
        return lam[0]
    model = FunctionModel(f, 1)
    with pytest.raises(ModelEvaluationError) as info:
        nisp_project(model, XS, EmbeddingSpec("triangular", 1), AugmentedParams([1.0], [0.5]), 1)
    assert info.value.node_index is not None
    assert "node" in str(info.value)


class TestPredictiveMoments:
    def test_classical_zero(self):
        out = nisp_project(poly_model(1), XS, EmbeddingSpec("classical", 2), AugmentedParams([1, 1]), 1)
        pm = predictive_moments(out, 0.0)
        np.testing.assert_array_equal(pm.var_model, 0)
        np.testing.assert_array_equal(pm.var_total, 0)

    def test_passthrough(self):
        out = nisp_project(passthrough(), XS, EmbeddingSpec("triangular", 1), AugmentedParams([2.0], [0.7]), 1)
        pm = predictive_moments(out)
        np.testing.assert_allclose(pm.mu, 2.0)
        np.testing.assert_allclose(pm.var_model, 0.49)

    def test_noise_only(self):
        out = nisp_project(poly_model(1), XS, EmbeddingSpec("classical", 2), AugmentedParams([1, 1]), 1)
        pm = predictive_moments(out, 0.1)
        np.testing.assert_allclose(pm.var_total, 0.01)
        assert np.all(pm.cov[~np.eye(3, dtype=bool)] == 0)

    def test_cov_diagonal_equals_variance(self):
        spec = EmbeddingSpec("triangular", 2)
        out = nisp_project(poly_model(3), XS, spec, AugmentedParams([0.1, 0.2], [0.3, 0.1, 0.2]), 3)
        pm = predictive_moments(out)
        assert np.array_equal(np.diag(pm.cov), pm.var_model)

    def test_negative_sigma(self):
        out = nisp_project(passthrough(), XS, EmbeddingSpec("triangular", 1), AugmentedParams([0], [1]), 1)
        with pytest.raises(ValueError):
            predictive_moments(out, -1.0)

    def test_against_monte_carlo(self):
        spec = EmbeddingSpec("triangular", 2)
        p = AugmentedParams([0.1, 0.2], [0.3, 0.1, 0.2])
        model = poly_model(2)
        out = nisp_project(model, XS, spec, p, 2)
        pm = predictive_moments(out)
        xi = np.random.default_rng(9).standard_normal((1_000_000, 2))
        mc = model.evaluate(XS, sample_lambda(spec, p, xi))
        se = mc.std(axis=0) / 1000
        assert np.all(np.abs(mc.mean(axis=0) - pm.mu) < 3 * se)
        np.testing.assert_allclose(mc.var(axis=0), pm.var_model, rtol=0.01)
