"""Non-intrusive spectral projection of a black-box model through an embedded input."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .embed import AugmentedParams, EmbeddingSpec, Variant, coefficient_matrix
from .pc import GermKind, PcBasis, PcExpansion, gauss_quadrature, sample_germ


class ModelEvaluationError(RuntimeError):
    def __init__(self, message, node_index=None, node=None, lam=None):
        super().__init__(message)
        self.node_index = node_index
        self.node = node
        self.lam = lam


class ForwardModel:
    """A deterministic model f(x; lambda).

    Subclasses implement :meth:`evaluate`, which maps design conditions
    ``xs`` of shape (N, xdim) and parameter sets ``lams`` of shape (Q, dim)
    to outputs of shape (Q, N).
    """

    dim: int = 1
    xdim: int = 1

    def evaluate(self, xs: np.ndarray, lams: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, x, lam) -> float:
        xs = np.atleast_2d(np.asarray(x, dtype=float))
        return float(self.evaluate(xs, np.atleast_2d(np.asarray(lam, dtype=float)))[0, 0])


class FunctionModel(ForwardModel):
    """Wraps a callable ``func(x, lam) -> float``.

    With ``vectorized=True`` the callable must accept ``xs`` of shape (N, xdim)
    and ``lams`` of shape (Q, dim) and return (Q, N).
    """

    def __init__(self, func: Callable, dim: int, xdim: int = 1, vectorized: bool = False):
        self.func = func
        self.dim = dim
        self.xdim = xdim
        self.vectorized = vectorized

    def evaluate(self, xs, lams):
        xs = np.asarray(xs, dtype=float)
        lams = np.asarray(lams, dtype=float)
        if self.vectorized:
            return np.asarray(self.func(xs, lams), dtype=float)
        return np.array([[float(self.func(x, lam)) for x in xs] for lam in lams])


def as_design(xs) -> np.ndarray:
    xs = np.asarray(xs, dtype=float)
    return xs[:, None] if xs.ndim == 1 else xs


@dataclass(frozen=True, eq=False)
class Projector:
    """Quadrature rule and basis values shared by every projection of one setup."""

    basis: PcBasis
    nodes: np.ndarray        # (Q, m)
    weights: np.ndarray      # (Q,)
    in_vals: np.ndarray      # (Q, K_in) input-basis values at nodes
    proj: np.ndarray         # (Q, K) weights * Psi_k(node) / ||Psi_k||^2


@lru_cache(maxsize=64)
def _projector(kind: GermKind, dim: int, order: int, pts: int, in_order: int) -> Projector:
    basis = PcBasis.total_order(kind, dim, order)
    rule = gauss_quadrature(kind, dim, pts)
    vals = basis.eval(rule.nodes)
    proj = rule.weights[:, None] * vals / basis.norms_sq[None, :]
    in_vals = PcBasis.total_order(kind, dim, in_order).eval(rule.nodes)
    for a in (vals, proj, in_vals):
        a.setflags(write=False)
    return Projector(basis, rule.nodes, rule.weights, in_vals, proj)


def projector_for(spec: EmbeddingSpec, order: int, pts_per_dim: Optional[int] = None) -> Projector:
    if spec.variant is Variant.CLASSICAL:
        return _projector(GermKind.HERMITE, 1, 0, 1, 0)
    if pts_per_dim is None:
        pts_per_dim = order + 1
    if pts_per_dim < order + 1:
        raise ValueError("pts_per_dim must be >= order + 1")
    return _projector(spec.germ_kind, spec.germ_dim, order, pts_per_dim, spec.input_order)


@dataclass(frozen=True, eq=False)
class OutputPce:
    """Output expansions f_k(x_i) for all design locations; ``coeffs`` is (N, K)."""

    basis: PcBasis
    coeffs: np.ndarray

    @property
    def mean(self) -> np.ndarray:
        return self.coeffs[:, 0]

    @property
    def variance(self) -> np.ndarray:
        return self.coeffs[:, 1:] ** 2 @ self.basis.norms_sq[1:]

    def covariance(self) -> np.ndarray:
        c = self.coeffs[:, 1:]
        cov = (c * self.basis.norms_sq[1:]) @ c.T
        np.fill_diagonal(cov, self.variance)
        return cov

    def expansion(self, i: int) -> PcExpansion:
        return PcExpansion(self.basis, self.coeffs[i].copy())

    def __len__(self):
        return self.coeffs.shape[0]

    def sample(self, n: int, rng: np.random.Generator, germ=None) -> np.ndarray:
        """(n, N) samples of the output process; `germ` overrides the random draw."""
        if germ is None:
            germ = sample_germ(self.basis.kind, self.basis.dim, n, rng)
        return self.basis.eval(germ) @ self.coeffs.T


def _evaluate_nodes(model: ForwardModel, xs, lams) -> np.ndarray:
    try:
        out = np.asarray(model.evaluate(xs, lams), dtype=float)
    except Exception as exc:
        for q, lam in enumerate(lams):
            try:
                model.evaluate(xs, lam[None, :])
            except Exception as inner:
                raise ModelEvaluationError(
                    f"model evaluation failed at quadrature node {q} (lambda={lam}): {inner}",
                    node_index=q, lam=lam,
                ) from inner
        raise ModelEvaluationError(f"model evaluation failed: {exc}") from exc
    if out.shape != (lams.shape[0], xs.shape[0]):
        raise ModelEvaluationError(
            f"model returned shape {out.shape}, expected {(lams.shape[0], xs.shape[0])}"
        )
    return out


def nisp_project(model: ForwardModel, xs, spec: EmbeddingSpec, params: AugmentedParams,
                 order: int, pts_per_dim: Optional[int] = None) -> OutputPce:
    """Project f(x_i; Lambda(alpha, xi)) onto the germ basis by Gauss quadrature."""
    xs = as_design(xs)
    pr = projector_for(spec, order, pts_per_dim)
    coef = coefficient_matrix(spec, params)
    lams = pr.in_vals @ coef                       # (Q, d)
    fvals = _evaluate_nodes(model, xs, lams)       # (Q, N)
    return OutputPce(pr.basis, fvals.T @ pr.proj)  # (N, K)


@dataclass(frozen=True, eq=False)
class PredictiveMoments:
    mu: np.ndarray
    var_model: np.ndarray
    var_total: np.ndarray
    cov: np.ndarray


def predictive_moments(out: OutputPce, sigma: float = 0.0) -> PredictiveMoments:
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    var_model = out.variance
    cov = out.covariance()
    cov[np.diag_indices_from(cov)] += sigma ** 2
    return PredictiveMoments(out.mean.copy(), var_model, var_model + sigma ** 2, cov)


__all__ = [
    "ForwardModel", "FunctionModel", "ModelEvaluationError", "OutputPce",
    "PredictiveMoments", "nisp_project", "predictive_moments", "projector_for",
    "as_design",
]
