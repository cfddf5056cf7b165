"""End-to-end calibration: start-point search, adaptive MCMC, prediction."""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .embed import EmbeddingSpec, Variant
from .inference import LogPosterior, NispConfig, default_start, optimize_start, proposal_scales
from .likelihood import Dataset, LikelihoodSpec
from .mcmc import AmcmcConfig, Chain, amcmc_run
from .nisp import ForwardModel
from .predict import PredictionMoments, map_pushed_forward, posterior_predictive, pushed_forward
from .prior import PriorSpec


def param_names(spec: EmbeddingSpec, infer_sigma: bool) -> list[str]:
    names = [f"lambda{j + 1}" for j in range(spec.dim)]
    basis = spec.input_basis
    for p, j in enumerate(spec.embedded):
        for k in spec.alpha_terms(p):
            if spec.variant is Variant.GENERAL:
                tag = "".join(str(v) for v in basis.indices[k])
                names.append(f"alpha_{tag}_{j + 1}")
            else:
                names.append(f"alpha{int(np.argmax(basis.indices[k])) + 1}_{j + 1}")
    if infer_sigma:
        names.append("log_sigma")
    return names


@dataclass
class CalibrationResult:
    chain: Chain
    posterior: LogPosterior
    start: np.ndarray


def calibrate(model: ForwardModel, data: Dataset, spec: EmbeddingSpec, likelihood: LikelihoodSpec,
              prior: PriorSpec, nisp: NispConfig | None = None, steps: int = 20000,
              mcmc: AmcmcConfig | None = None, start=None, lam_guess=None,
              optimize: bool = True, auto_scales: bool = True) -> CalibrationResult:
    """Sample the posterior of the augmented parameters.

    Without an explicit `start`, chains begin at a least-squares lambda with
    small embedding coefficients, optionally polished by Nelder-Mead.
    ``auto_scales`` replaces the initial proposal scales by per-coordinate
    curvature probes at the start point.
    """
    post = LogPosterior(model, data, spec, likelihood, prior, nisp)
    x0 = default_start(post, lam_guess) if start is None else np.asarray(start, dtype=float)
    if not np.isfinite(post(x0)):
        from .mcmc import InfeasibleStartError
        raise InfeasibleStartError("infeasible start: outside prior support or likelihood undefined")
    if optimize:
        x0 = optimize_start(post, x0)
    cfg = mcmc or AmcmcConfig()
    if auto_scales:
        cfg = replace(cfg, scales=proposal_scales(post, x0))
    chain = amcmc_run(post, x0, steps, cfg)
    chain.names = param_names(spec, likelihood.infer_sigma)
    return CalibrationResult(chain, post, x0)


def predict(result: CalibrationResult, xs=None, subsample: Optional[int] = 500,
            mode: str = "pushed_forward") -> PredictionMoments:
    """Moments at `xs` (defaults to the data locations).

    ``mode`` is "pushed_forward", "posterior_predictive" or "map".
    """
    post = result.posterior
    xs = post.data.xs if xs is None else xs
    if mode == "map":
        return map_pushed_forward(result.chain.map_point, post.model, post.spec, xs,
                                  post.nisp, post.infer_sigma)
    pf = pushed_forward(result.chain, post.model, post.spec, xs, post.nisp, subsample,
                        post.infer_sigma)
    if mode == "pushed_forward":
        return pf
    if mode == "posterior_predictive":
        sigma = None if post.infer_sigma else post.likelihood.sigma
        return posterior_predictive(pf, result.chain, sigma, post.spec)
    raise ValueError(f"unknown prediction mode {mode!r}")
