"""Pushed-forward and posterior-predictive moments with variance attribution.

For each retained posterior sample the output is projected onto the germ
basis; the pushed-forward variance then splits into a model-error part
(posterior mean of the germ-induced variance) and a posterior-uncertainty
part (posterior variance of the germ mean). Posterior-predictive moments add
the data-noise variance.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .embed import AugmentedParams, EmbeddingSpec
from .inference import NispConfig
from .mcmc import Chain
from .nisp import ForwardModel, OutputPce, as_design, nisp_project


@dataclass
class PredictionMoments:
    """Per-location moments; every field except ``xs`` has shape (M,)."""

    xs: np.ndarray
    mu_pf: np.ndarray
    var_model_error: np.ndarray
    var_posterior: np.ndarray
    var_data_noise: np.ndarray
    extras: dict = field(default_factory=dict)

    @property
    def var_total(self) -> np.ndarray:
        return self.var_model_error + self.var_posterior + self.var_data_noise

    def __len__(self):
        return self.mu_pf.size

    def averages(self) -> dict:
        return {
            "var_model_error": float(np.mean(self.var_model_error)),
            "var_posterior": float(np.mean(self.var_posterior)),
            "var_data_noise": float(np.mean(self.var_data_noise)),
            "var_total": float(np.mean(self.var_total)),
        }


def subsample_indices(n: int, count: Optional[int]) -> np.ndarray:
    """`count` equally spaced indices into a length-n sequence (all if None or >= n)."""
    if n < 1:
        raise ValueError("empty chain")
    if count is None or count >= n:
        return np.arange(n)
    if count < 1:
        raise ValueError("subsample must be >= 1")
    return np.unique(np.round(np.linspace(0, n - 1, count)).astype(int))


def project_samples(samples, model: ForwardModel, spec: EmbeddingSpec, xs,
                    nisp: NispConfig, infer_sigma: bool = False) -> list[OutputPce]:
    return [
        nisp_project(model, xs, spec, AugmentedParams.from_flat(spec, s, infer_sigma),
                     nisp.order, nisp.pts_per_dim)
        for s in np.atleast_2d(samples)
    ]


def _moments_from_outputs(xs, outs: list[OutputPce], ddof: int) -> PredictionMoments:
    f0 = np.array([o.mean for o in outs])          # (S, M)
    fvar = np.array([o.variance for o in outs])    # (S, M)
    s = f0.shape[0]
    var_post = f0.var(axis=0, ddof=ddof) if s > ddof else np.zeros(f0.shape[1])
    return PredictionMoments(as_design(xs), f0.mean(axis=0), fvar.mean(axis=0),
                             var_post, np.zeros(f0.shape[1]))


def pushed_forward(chain: Chain | np.ndarray, model: ForwardModel, spec: EmbeddingSpec, xs,
                   nisp: NispConfig | None = None, subsample: Optional[int] = 500,
                   infer_sigma: bool = False, ddof: int = 1) -> PredictionMoments:
    """Posterior-averaged pushed-forward moments at `xs`.

    `chain` may be a :class:`Chain` or an (S, P) array of flat samples.
    ``ddof=1`` gives the unbiased posterior-variance estimator.
    """
    nisp = nisp or NispConfig()
    samples = chain.samples if isinstance(chain, Chain) else np.atleast_2d(chain)
    if samples.shape[0] == 0:
        raise ValueError("empty chain")
    idx = subsample_indices(samples.shape[0], subsample)
    outs = project_samples(samples[idx], model, spec, xs, nisp, infer_sigma)
    return _moments_from_outputs(xs, outs, ddof)


def posterior_predictive(pf: PredictionMoments, chain: Chain | np.ndarray | None = None,
                         sigma: Optional[float] = None, spec: EmbeddingSpec | None = None) -> PredictionMoments:
    """Add data-noise variance to pushed-forward moments.

    With a fixed ``sigma`` the noise variance is ``sigma**2``. With
    ``sigma=None`` it is the posterior mean of sigma**2 over the chain,
    reading log sigma from the last column (which must exist in the layout).
    """
    if sigma is not None:
        if sigma < 0:
            raise ValueError("sigma must be non-negative")
        noise = sigma ** 2
    else:
        if chain is None:
            raise ValueError("inferred-sigma mode needs the chain")
        samples = chain.samples if isinstance(chain, Chain) else np.atleast_2d(chain)
        if spec is not None and samples.shape[1] != spec.dim + spec.alpha_count + 1:
            raise ValueError("chain layout has no log-sigma column")
        noise = float(np.mean(np.exp(2.0 * samples[:, -1])))
    return PredictionMoments(pf.xs, pf.mu_pf.copy(), pf.var_model_error.copy(),
                             pf.var_posterior.copy(), np.full(pf.mu_pf.shape, noise),
                             dict(pf.extras))


def map_pushed_forward(map_point, model: ForwardModel, spec: EmbeddingSpec, xs,
                       nisp: NispConfig | None = None, infer_sigma: bool = False) -> PredictionMoments:
    vec = map_point.flatten() if isinstance(map_point, AugmentedParams) else np.asarray(map_point)
    return pushed_forward(vec[None, :], model, spec, xs, nisp, None, infer_sigma)


def pushed_forward_covariance(chain: Chain | np.ndarray, model: ForwardModel, spec: EmbeddingSpec,
                              xs, nisp: NispConfig | None = None, subsample: Optional[int] = 500,
                              infer_sigma: bool = False, ddof: int = 1) -> dict:
    """Full (M, M) model-error and posterior-uncertainty covariance matrices."""
    nisp = nisp or NispConfig()
    samples = chain.samples if isinstance(chain, Chain) else np.atleast_2d(chain)
    idx = subsample_indices(samples.shape[0], subsample)
    outs = project_samples(samples[idx], model, spec, xs, nisp, infer_sigma)
    me = np.mean([o.covariance() for o in outs], axis=0)
    f0 = np.array([o.mean for o in outs])
    pu = np.atleast_2d(np.cov(f0, rowvar=False, ddof=ddof)) if f0.shape[0] > ddof else np.zeros_like(me)
    return {"model_error": me, "posterior": pu}


def write_predictions(pred: PredictionMoments, path) -> None:
    xs = as_design(pred.xs)
    xcols = ["x"] if xs.shape[1] == 1 else [f"x{j + 1}" for j in range(xs.shape[1])]
    cols = xcols + ["mu_pf", "sd_model_error", "sd_posterior", "sd_data_noise", "sd_total"]
    table = np.column_stack([
        xs, pred.mu_pf, np.sqrt(pred.var_model_error), np.sqrt(pred.var_posterior),
        np.sqrt(pred.var_data_noise), np.sqrt(pred.var_total),
    ])
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(cols) + "\n")
        for row in table:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def read_predictions(path) -> dict[str, np.ndarray]:
    with open(path) as fh:
        cols = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return {c: data[:, j] for j, c in enumerate(cols)}
