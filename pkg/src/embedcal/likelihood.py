"""Log-likelihoods over pushed-forward data predictions.

Moment-based forms (independent normal, ABC on mean and standard deviation)
take predictive means and standard deviations. Sample-based forms
(independent-component KDE, multivariate normal) take an (R, N) matrix of
push-forward samples.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import linalg

LOG_2PI = math.log(2.0 * math.pi)


class DegenerateLikelihoodError(ValueError):
    pass


class LikelihoodKind(str, enum.Enum):
    CLASSICAL = "classical"
    INDEPENDENT_NORMAL = "independent_normal"
    ABC = "abc"
    KDE = "kde"
    MVN = "mvn"


@dataclass(frozen=True)
class LikelihoodSpec:
    """Likelihood choice and hyperparameters.

    ``sigma=None`` means the data-noise scale is inferred (log sigma is the
    last entry of the flat parameter vector).
    """

    kind: LikelihoodKind
    sigma: Optional[float] = None
    epsilon: float = 1e-3
    gamma: float = 1.0
    samples: int = 1000
    bandwidth: str = "silverman"
    nugget: Optional[float] = None
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", LikelihoodKind(self.kind))
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.kind in (LikelihoodKind.KDE, LikelihoodKind.MVN) and self.samples < 100:
            raise ValueError("sample-based likelihoods need samples >= 100")
        if self.sigma is not None and self.sigma < 0:
            raise ValueError("sigma must be non-negative")

    @property
    def infer_sigma(self) -> bool:
        return self.sigma is None


@dataclass(frozen=True)
class Dataset:
    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        xs = xs[:, None] if xs.ndim == 1 else xs
        ys = np.asarray(self.ys, dtype=float).ravel()
        if xs.shape[0] != ys.shape[0]:
            raise ValueError("xs and ys must have the same length")
        if ys.size < 1:
            raise ValueError("empty dataset")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @property
    def n(self) -> int:
        return self.ys.size


def loglik_independent_normal(mu, sd, ys) -> float:
    mu, sd, ys = (np.asarray(a, dtype=float) for a in (mu, sd, ys))
    if np.any(sd <= 0):
        raise DegenerateLikelihoodError("degenerate predictive variance")
    r = (ys - mu) / sd
    return float(-0.5 * ys.size * LOG_2PI - np.sum(np.log(sd)) - 0.5 * np.sum(r * r))


def loglik_abc(mu, sd, ys, epsilon: float, gamma: float) -> float:
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    mu, sd, ys = (np.asarray(a, dtype=float) for a in (mu, sd, ys))
    dev = np.abs(mu - ys)
    dist2 = dev ** 2 + (sd - gamma * dev) ** 2
    return float(-ys.size * math.log(epsilon * math.sqrt(2.0 * math.pi))
                 - np.sum(dist2) / (2.0 * epsilon ** 2))


def loglik_classical(pred, ys, sigma: float) -> float:
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    pred = np.asarray(pred, dtype=float)
    return loglik_independent_normal(pred, np.full(pred.shape, float(sigma)), ys)


def silverman_bandwidth(samples: np.ndarray) -> np.ndarray:
    """Per-column Silverman rule: 0.9 min(sd, IQR/1.34) R^(-1/5)."""
    samples = np.asarray(samples, dtype=float)
    r = samples.shape[0]
    sd = samples.std(axis=0, ddof=1)
    q75, q25 = np.percentile(samples, [75, 25], axis=0)
    spread = np.minimum(sd, (q75 - q25) / 1.34)
    spread = np.where(spread > 0, spread, sd)
    return 0.9 * spread * r ** (-0.2)


def scott_bandwidth(samples: np.ndarray) -> np.ndarray:
    samples = np.asarray(samples, dtype=float)
    return 1.06 * samples.std(axis=0, ddof=1) * samples.shape[0] ** (-0.2)


_BANDWIDTH_RULES = {"silverman": silverman_bandwidth, "scott": scott_bandwidth}


def kde_bandwidth(samples, rule="silverman") -> np.ndarray:
    if callable(rule):
        return np.asarray(rule(samples), dtype=float)
    if isinstance(rule, (int, float)):
        return np.full(np.shape(samples)[1], float(rule))
    return _BANDWIDTH_RULES[rule](samples)


def loglik_ic_kde(push_samples, ys, bandwidth="silverman") -> float:
    """Sum of log marginal Gaussian-kernel density estimates at the data."""
    h = np.asarray(push_samples, dtype=float)
    ys = np.asarray(ys, dtype=float).ravel()
    if h.ndim != 2 or h.shape[1] != ys.size:
        raise ValueError("push_samples must have shape (R, N)")
    if h.shape[0] < 100:
        raise ValueError("need at least 100 push-forward samples")
    w = kde_bandwidth(h, bandwidth)
    if np.any(~(w > 0)):
        raise DegenerateLikelihoodError("degenerate marginal: zero KDE bandwidth")
    z = (h - ys[None, :]) / w[None, :]
    # log-mean-exp over samples, per component
    logk = -0.5 * z * z
    m = logk.max(axis=0)
    lse = m + np.log(np.mean(np.exp(logk - m[None, :]), axis=0))
    return float(np.sum(lse - np.log(w) - 0.5 * LOG_2PI))


def loglik_joint_kde(push_samples, ys, bandwidth="silverman") -> float:
    """Full N-dimensional Gaussian KDE with a diagonal bandwidth matrix.

    Cost grows with R and the estimate degrades quickly with N; meant for
    small-N checks only.
    """
    h = np.asarray(push_samples, dtype=float)
    ys = np.asarray(ys, dtype=float).ravel()
    w = kde_bandwidth(h, bandwidth)
    if np.any(~(w > 0)):
        raise DegenerateLikelihoodError("degenerate marginal: zero KDE bandwidth")
    z = (h - ys[None, :]) / w[None, :]
    logk = -0.5 * np.sum(z * z, axis=1)
    m = logk.max()
    return float(m + np.log(np.mean(np.exp(logk - m))) - np.sum(np.log(w))
                 - 0.5 * ys.size * LOG_2PI)


def loglik_mvn(push_samples, ys, nugget: Optional[float] = None) -> float:
    """Gaussian log-density at the data with sample mean and covariance.

    The covariance is regularized by ``nugget * I``; the default nugget is
    ``1e-10 * trace / N``.
    """
    h = np.asarray(push_samples, dtype=float)
    ys = np.asarray(ys, dtype=float).ravel()
    r, n = h.shape
    if n != ys.size:
        raise ValueError("push_samples must have shape (R, N)")
    mu = h.mean(axis=0)
    cov = np.atleast_2d(np.cov(h, rowvar=False, ddof=1))
    if nugget is None:
        nugget = 1e-10 * np.trace(cov) / n
    if r <= n and nugget <= 0:
        raise DegenerateLikelihoodError("need more samples than data points or a positive nugget")
    cond = np.linalg.cond(cov)
    if not np.isfinite(cond) or cond > 1e12:
        warnings.warn(f"push-forward covariance is near-singular (cond={cond:.3g})",
                      RuntimeWarning, stacklevel=2)
    reg = cov + nugget * np.eye(n)
    try:
        chol = linalg.cholesky(reg, lower=True)
    except linalg.LinAlgError as exc:
        raise DegenerateLikelihoodError("covariance not positive definite after nugget") from exc
    diag = np.diag(chol)
    if np.any(diag <= 0) or not np.all(np.isfinite(diag)):
        raise DegenerateLikelihoodError("covariance not positive definite after nugget")
    z = linalg.solve_triangular(chol, ys - mu, lower=True)
    return float(-0.5 * n * LOG_2PI - np.sum(np.log(diag)) - 0.5 * z @ z)


__all__: Sequence[str] = [
    "LikelihoodKind", "LikelihoodSpec", "Dataset", "DegenerateLikelihoodError",
    "loglik_independent_normal", "loglik_abc", "loglik_classical", "loglik_ic_kde",
    "loglik_joint_kde", "loglik_mvn", "silverman_bandwidth", "kde_bandwidth",
]
