"""Uniform priors with support constraints on the augmented parameters."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .embed import AugmentedParams, EmbeddingSpec, Variant


@dataclass(frozen=True, eq=False)
class PriorSpec:
    """Flat prior over a box in lambda, with embedding-specific constraints.

    For the uniform embedding with ``enforce_range`` the stochastic input
    must stay in the box: lambda_j - alpha_j >= a_j and lambda_j + alpha_j <= b_j.
    ``alpha_bounds`` optionally boxes every alpha entry; ``log_sigma_bounds``
    bounds log sigma when it is inferred.
    """

    lambda_bounds: np.ndarray
    enforce_range: bool = True
    positive_diagonal: bool = True
    alpha_bounds: Optional[tuple[float, float]] = None
    log_sigma_bounds: tuple[float, float] = (-10.0, 5.0)

    def __post_init__(self):
        b = np.atleast_2d(np.asarray(self.lambda_bounds, dtype=float))
        if b.shape[1] != 2 or np.any(b[:, 0] >= b[:, 1]):
            raise ValueError("lambda_bounds must be (d, 2) with a_j < b_j")
        object.__setattr__(self, "lambda_bounds", b)
        lo, hi = self.log_sigma_bounds
        if lo >= hi:
            raise ValueError("log_sigma_bounds must satisfy lo < hi")

    def contains(self, spec: EmbeddingSpec, params: AugmentedParams) -> bool:
        return np.isfinite(log_prior(self, spec, params))


def log_prior(prior: PriorSpec, spec: EmbeddingSpec, params: AugmentedParams) -> float:
    lam, alpha = params.lam, params.alpha
    a, b = prior.lambda_bounds[:, 0], prior.lambda_bounds[:, 1]
    if lam.shape != a.shape:
        raise ValueError("prior bounds do not match parameter dimension")
    if np.any(lam < a) or np.any(lam > b):
        return -np.inf
    if prior.alpha_bounds is not None and alpha.size:
        lo, hi = prior.alpha_bounds
        if np.any(alpha < lo) or np.any(alpha > hi):
            return -np.inf
    if prior.positive_diagonal:
        diag = spec.diagonal_positions()
        if diag and np.any(alpha[diag] < 0):
            return -np.inf
    if spec.variant is Variant.UNIFORM and prior.enforce_range:
        emb = list(spec.embedded)
        if np.any(alpha < 0):
            return -np.inf
        if np.any(lam[emb] + alpha > b[emb]) or np.any(lam[emb] - alpha < a[emb]):
            return -np.inf
    if params.log_sigma is not None:
        lo, hi = prior.log_sigma_bounds
        if not lo <= params.log_sigma <= hi:
            return -np.inf
    return 0.0
