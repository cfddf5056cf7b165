"""Log-posterior over the flat augmented parameter vector, plus start-point search."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import optimize

from .embed import AugmentedParams, EmbeddingSpec, Variant, param_count
from .likelihood import (
    Dataset, DegenerateLikelihoodError, LikelihoodKind, LikelihoodSpec,
    loglik_abc, loglik_ic_kde, loglik_independent_normal, loglik_mvn,
)
from .nisp import ForwardModel, OutputPce, nisp_project
from .pc import sample_germ
from .prior import PriorSpec, log_prior


@dataclass
class NispConfig:
    order: int = 1
    pts_per_dim: Optional[int] = None

    @property
    def points(self) -> int:
        return self.pts_per_dim if self.pts_per_dim is not None else self.order + 1


class LogPosterior:
    """Callable flat-vector log-posterior for embedded model-error calibration."""

    def __init__(self, model: ForwardModel, data: Dataset, spec: EmbeddingSpec,
                 likelihood: LikelihoodSpec, prior: PriorSpec,
                 nisp: NispConfig | None = None):
        self.model = model
        self.data = data
        self.spec = spec
        self.likelihood = likelihood
        self.prior = prior
        self.nisp = nisp or NispConfig()
        self.infer_sigma = likelihood.infer_sigma
        self.n_params = param_count(spec, self.infer_sigma)
        self._germ = None
        self._noise = None
        if likelihood.kind in (LikelihoodKind.KDE, LikelihoodKind.MVN):
            # common random numbers keep the sampled likelihood deterministic in the parameters
            rng = np.random.default_rng(likelihood.seed)
            self._germ = sample_germ(spec.germ_kind, spec.germ_dim, likelihood.samples, rng)
            self._noise = rng.standard_normal((likelihood.samples, data.n))

    def unpack(self, vec) -> AugmentedParams:
        return AugmentedParams.from_flat(self.spec, vec, self.infer_sigma)

    def sigma_of(self, params: AugmentedParams) -> float:
        return params.sigma if self.infer_sigma else float(self.likelihood.sigma)

    def project(self, params: AugmentedParams) -> OutputPce:
        return nisp_project(self.model, self.data.xs, self.spec, params,
                            self.nisp.order, self.nisp.pts_per_dim)

    def loglik(self, params: AugmentedParams) -> float:
        out = self.project(params)
        sigma = self.sigma_of(params)
        ys = self.data.ys
        kind = self.likelihood.kind
        mu = out.mean
        if not np.all(np.isfinite(out.coeffs)):
            return -np.inf
        if kind in (LikelihoodKind.CLASSICAL, LikelihoodKind.INDEPENDENT_NORMAL, LikelihoodKind.ABC):
            var = sigma ** 2 if kind is LikelihoodKind.CLASSICAL else out.variance + sigma ** 2
            sd = np.sqrt(np.broadcast_to(var, mu.shape))
            if kind is LikelihoodKind.ABC:
                return loglik_abc(mu, sd, ys, self.likelihood.epsilon, self.likelihood.gamma)
            return loglik_independent_normal(mu, sd, ys)
        h = out.sample(0, None, germ=self._germ) + sigma * self._noise
        if kind is LikelihoodKind.KDE:
            return loglik_ic_kde(h, ys, self.likelihood.bandwidth)
        return loglik_mvn(h, ys, self.likelihood.nugget)

    def __call__(self, vec) -> float:
        params = self.unpack(vec)
        lp = log_prior(self.prior, self.spec, params)
        if not math.isfinite(lp):
            return -np.inf
        try:
            ll = self.loglik(params)
        except (DegenerateLikelihoodError, FloatingPointError, OverflowError):
            return -np.inf
        return lp + ll if math.isfinite(ll) else -np.inf


def classical_fit(model: ForwardModel, data: Dataset, lam0, bounds=None) -> np.ndarray:
    """Least-squares fit of lambda (no model error), used to seed the chains."""
    lam0 = np.asarray(lam0, dtype=float)

    def resid(lam):
        r = model.evaluate(data.xs, lam[None, :])[0] - data.ys
        return np.where(np.isfinite(r), r, 1e10)

    kw = {}
    if bounds is not None:
        b = np.asarray(bounds, dtype=float)
        lam0 = np.clip(lam0, b[:, 0], b[:, 1])
        kw["bounds"] = (b[:, 0], b[:, 1])
    return optimize.least_squares(resid, lam0, **kw).x


def default_start(post: LogPosterior, lam_guess=None, alpha_frac: float = 0.05) -> np.ndarray:
    """A feasible start: least-squares lambda, small positive diagonal alpha, sigma from residuals."""
    spec = post.spec
    bounds = post.prior.lambda_bounds
    if lam_guess is None:
        lam_guess = bounds.mean(axis=1)
    lam = classical_fit(post.model, post.data, lam_guess, bounds)
    alpha = np.zeros(spec.alpha_count)
    diag = spec.diagonal_positions()
    if spec.variant in (Variant.FULL, Variant.GENERAL):
        pos = 0
        for p in range(len(spec.embedded)):
            terms = spec.alpha_terms(p)
            if p + 1 in terms:
                diag.append(pos + terms.index(p + 1))
            pos += len(terms)
    width = bounds[:, 1] - bounds[:, 0]
    for p, j in enumerate(spec.embedded):
        if p < len(diag):
            alpha[diag[p]] = alpha_frac * max(abs(lam[j]), 1e-2 * width[j], 1e-3)
    if spec.variant is Variant.UNIFORM:
        for p, j in enumerate(spec.embedded):
            room = min(lam[j] - bounds[j, 0], bounds[j, 1] - lam[j])
            alpha[diag[p]] = min(alpha[diag[p]], 0.5 * max(room, 0.0))
    vec = np.concatenate([lam, alpha])
    if post.infer_sigma:
        r = post.model.evaluate(post.data.xs, lam[None, :])[0] - post.data.ys
        s = float(np.sqrt(np.mean(r ** 2))) or 1e-3
        lo, hi = post.prior.log_sigma_bounds
        vec = np.append(vec, np.clip(math.log(s), lo, hi))
    return vec


def optimize_start(post: LogPosterior, x0, restarts: int = 3, maxiter: int = 4000) -> np.ndarray:
    """Polish a feasible start by Nelder-Mead on the negative log-posterior."""
    x = np.asarray(x0, dtype=float)
    fx = post(x)
    if not np.isfinite(fx):
        raise ValueError("optimize_start needs a feasible x0")

    def nlp(v):
        val = post(v)
        return -val if np.isfinite(val) else 1e300

    for _ in range(restarts):
        res = optimize.minimize(nlp, x, method="Nelder-Mead",
                                options={"maxiter": maxiter, "maxfev": maxiter * 2,
                                         "xatol": 1e-10, "fatol": 1e-10, "adaptive": True})
        if np.isfinite(post(res.x)) and -res.fun > fx:
            improved = -res.fun - fx
            x, fx = res.x, -res.fun
            if improved < 1e-6:
                break
        else:
            break
    return x


def proposal_scales(post: LogPosterior, x, drop: float = 0.5, floor: float = 1e-10) -> np.ndarray:
    """Per-coordinate step size at which the log-posterior falls by about `drop`.

    Probes both directions by bisection on a log scale; infinite walls count
    as a drop. Gives sensible initial random-walk scales for very peaked
    targets (e.g. small-tolerance ABC) before covariance adaptation starts.
    """
    x = np.asarray(x, dtype=float)
    f0 = post(x)
    out = np.empty(x.size)
    for j in range(x.size):
        steps = []
        for sign in (1.0, -1.0):
            lo, hi = floor, max(1.0, 10 * abs(x[j]))
            for _ in range(60):
                mid = math.sqrt(lo * hi)
                e = np.zeros_like(x)
                e[j] = sign * mid
                fd = f0 - post(x + e)
                if fd > drop:
                    hi = mid
                else:
                    lo = mid
                if hi / lo < 1.05:
                    break
            steps.append(math.sqrt(lo * hi))
        out[j] = max(max(steps), floor)
    return out
