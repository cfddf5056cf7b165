import numpy as np
import pytest

from embedcal.embed import AugmentedParams, EmbeddingSpec
from embedcal.prior import PriorSpec, log_prior

UNIT = PriorSpec([[0.0, 1.0]])
U1 = EmbeddingSpec("uniform", 1)


def test_uniform_violation():
    assert log_prior(UNIT, U1, AugmentedParams([0.5], [0.6])) == -np.inf


def test_uniform_boundary_included():
    assert log_prior(UNIT, U1, AugmentedParams([0.5], [0.5])) == 0.0


def test_triangular_negative_diagonal():
    spec = EmbeddingSpec("triangular", 2)
    prior = PriorSpec([[-5, 5], [-5, 5]])
    assert log_prior(prior, spec, AugmentedParams([0, 0], [0.1, 0.3, -0.1])) == -np.inf
    assert log_prior(prior, spec, AugmentedParams([0, 0], [0.1, -0.3, 0.1])) == 0.0


def test_lambda_box():
    spec = EmbeddingSpec("classical", 2)
    prior = PriorSpec([[0, 1], [0, 1]])
    assert log_prior(prior, spec, AugmentedParams([1.0, 0.0])) == 0.0
    assert log_prior(prior, spec, AugmentedParams([1.01, 0.0])) == -np.inf


def test_triangle_membership_by_rejection_sampling():
    a, b = -1.0, 3.0
    prior = PriorSpec([[a, b]])
    pts = np.random.default_rng(0).uniform([a - 1, -1], [b + 1, (b - a)], (20000, 2))
    for lam, alpha in pts:
        inside = alpha >= 0 and lam - alpha >= a and lam + alpha <= b
        got = log_prior(prior, U1, AugmentedParams([lam], [alpha])) == 0.0
        assert got == inside
    # vertices of the support triangle are included
    for lam, alpha in [(a, 0), (b, 0), ((a + b) / 2, (b - a) / 2)]:
        assert log_prior(prior, U1, AugmentedParams([lam], [alpha])) == 0.0


def test_invalid_bounds():
    with pytest.raises(ValueError):
        PriorSpec([[1.0, 0.0]])
