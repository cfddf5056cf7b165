"""Adaptive Metropolis (Haario et al.) random-walk sampler."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np


class InfeasibleStartError(ValueError):
    pass


@dataclass
class AmcmcConfig:
    """Sampler settings.

    ``scales`` are initial proposal standard deviations (scalar or per
    parameter); ``burnin=None`` discards the first 10% of steps.
    """

    scales: float | Sequence[float] = 0.1
    adapt_start: int = 1000
    adapt_interval: int = 100
    cov_nugget: float = 1e-8
    burnin: Optional[int] = None
    thin: int = 10
    seed: int = 0


@dataclass
class Chain:
    samples: np.ndarray       # (S, P), post burn-in and thinned
    logposts: np.ndarray      # (S,)
    steps: np.ndarray         # (S,), step index of each stored sample
    map_point: np.ndarray
    map_logpost: float
    acceptance_rate: float
    seed: int
    names: list[str] = field(default_factory=list)

    def __len__(self):
        return self.samples.shape[0]

    @property
    def dim(self) -> int:
        return self.samples.shape[1]

    def column_names(self) -> list[str]:
        return self.names or [f"p{j}" for j in range(self.dim)]


def amcmc_run(logpost: Callable[[np.ndarray], float], init, steps: int,
              config: AmcmcConfig | None = None) -> Chain:
    """Run a single adaptive random-walk Metropolis chain.

    Before ``adapt_start`` the proposal is Gaussian with diagonal covariance
    ``scales**2``; afterwards, every ``adapt_interval`` steps it becomes
    ``2.4**2 / P * C + cov_nugget * I`` with C the covariance of all states
    visited so far.
    """
    cfg = config or AmcmcConfig()
    x = np.array(init, dtype=float)
    p = x.size
    if steps < 1:
        raise ValueError("steps must be >= 1")
    lp = float(logpost(x))
    if not np.isfinite(lp):
        raise InfeasibleStartError("infeasible start: log-posterior is not finite at init")

    rng = np.random.default_rng(cfg.seed)
    scales = np.broadcast_to(np.asarray(cfg.scales, dtype=float), (p,)).copy()
    chol = np.diag(scales)
    sd = 2.4 ** 2 / p
    burnin = int(0.1 * steps) if cfg.burnin is None else int(cfg.burnin)
    thin = max(int(cfg.thin), 1)

    mean = x.copy()
    m2 = np.zeros((p, p))
    n_seen = 1
    best_x, best_lp = x.copy(), lp
    accepted = 0
    counted = 0

    kept_x, kept_lp, kept_step = [], [], []
    if burnin == 0:
        kept_x.append(x.copy()); kept_lp.append(lp); kept_step.append(0)

    for t in range(1, steps):
        if t >= cfg.adapt_start and (t - cfg.adapt_start) % cfg.adapt_interval == 0 and n_seen > 1:
            cov = sd * m2 / (n_seen - 1) + cfg.cov_nugget * np.eye(p)
            try:
                chol = np.linalg.cholesky(cov)
            except np.linalg.LinAlgError:
                pass
        y = x + chol @ rng.standard_normal(p)
        u = rng.random()
        lpy = float(logpost(y))
        if lpy > best_lp:
            best_x, best_lp = y.copy(), lpy
        ok = np.isfinite(lpy) and (lpy >= lp or math.log(u) < lpy - lp)
        if ok:
            x, lp = y, lpy
        if t >= cfg.adapt_start:
            counted += 1
            accepted += ok
        n_seen += 1
        delta = x - mean
        mean += delta / n_seen
        m2 += np.outer(delta, x - mean)
        if t >= burnin and (t - burnin) % thin == 0:
            kept_x.append(x.copy()); kept_lp.append(lp); kept_step.append(t)

    if not kept_x:
        kept_x.append(x.copy()); kept_lp.append(lp); kept_step.append(steps - 1)
    rate = accepted / counted if counted else 0.0
    return Chain(np.array(kept_x), np.array(kept_lp), np.array(kept_step, dtype=int),
                 best_x, best_lp, float(rate), int(cfg.seed))


def map_estimate(chain: Chain) -> np.ndarray:
    if chain.samples.shape[0] == 0:
        raise ValueError("empty chain")
    return chain.map_point.copy()


def write_chain(chain: Chain, path) -> None:
    names = chain.column_names()
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(["step", "logpost"] + names) + "\n")
        for s, lp, row in zip(chain.steps, chain.logposts, chain.samples):
            fh.write(",".join([str(int(s)), repr(float(lp))] + [repr(float(v)) for v in row]) + "\n")


def read_chain(path) -> tuple[list[str], np.ndarray, np.ndarray, np.ndarray]:
    """Return (parameter names, steps, logposts, samples) from a chain CSV."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return header[2:], data[:, 0].astype(int), data[:, 1], data[:, 2:]
