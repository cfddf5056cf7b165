"""Per-location least-squares Legendre surrogates f_s(x_i; lambda)."""
from __future__ import annotations

import io
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import linalg

from .nisp import ForwardModel, as_design
from .pc import GermKind, PcBasis


class IllPosedDesignError(ValueError):
    pass


class ExtrapolationWarning(UserWarning):
    pass


def scale_to_unit(lam, ranges) -> np.ndarray:
    ranges = np.asarray(ranges, dtype=float)
    lo, hi = ranges[:, 0], ranges[:, 1]
    return 2.0 * (np.asarray(lam, dtype=float) - lo) / (hi - lo) - 1.0


@dataclass(frozen=True, eq=False)
class SurrogateModel:
    """Legendre surrogate per location; ``coeffs`` is (N, K) over a shared basis."""

    basis: PcBasis
    ranges: np.ndarray
    coeffs: np.ndarray
    loo_errors: np.ndarray

    @property
    def n_locations(self) -> int:
        return self.coeffs.shape[0]

    def design_matrix(self, lams) -> np.ndarray:
        return self.basis.eval(scale_to_unit(np.atleast_2d(lams), self.ranges))

    def evaluate(self, lams, warn: bool = True) -> np.ndarray:
        """Values at all locations for parameter sets `lams` (Q, d) -> (Q, N)."""
        lams = np.atleast_2d(np.asarray(lams, dtype=float))
        z = scale_to_unit(lams, self.ranges)
        if warn and np.any(np.abs(z) > 1.0 + 1e-12):
            warnings.warn("surrogate evaluated outside its training ranges",
                          ExtrapolationWarning, stacklevel=2)
        return self.basis.eval(z) @ self.coeffs.T

    def to_text(self) -> str:
        buf = io.StringIO()
        d, n, k = self.ranges.shape[0], self.n_locations, self.basis.size
        buf.write("# embedcal surrogate\n")
        buf.write(f"ranges {d}\n")
        for lo, hi in self.ranges:
            buf.write(f"{float(lo)!r} {float(hi)!r}\n")
        buf.write(f"indices {k}\n")
        for row in self.basis.indices:
            buf.write(" ".join(str(int(v)) for v in row) + "\n")
        buf.write(f"coefficients {n}\n")
        for row in self.coeffs:
            buf.write(" ".join(repr(float(v)) for v in row) + "\n")
        buf.write(f"loo {n}\n")
        buf.write(" ".join(repr(float(v)) for v in self.loo_errors) + "\n")
        return buf.getvalue()

    @classmethod
    def from_text(cls, text: str) -> "SurrogateModel":
        lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
        it = iter(lines)

        def section(name):
            tag, count = next(it).split()
            if tag != name:
                raise ValueError(f"expected section '{name}', found '{tag}'")
            return int(count)

        d = section("ranges")
        ranges = np.array([[float(v) for v in next(it).split()] for _ in range(d)])
        k = section("indices")
        idx = np.array([[int(v) for v in next(it).split()] for _ in range(k)])
        n = section("coefficients")
        coeffs = np.array([[float(v) for v in next(it).split()] for _ in range(n)])
        section("loo")
        loo = np.array([float(v) for v in next(it).split()])
        return cls(PcBasis.from_indices(GermKind.LEGENDRE, idx), ranges, coeffs, loo)

    def save(self, path) -> None:
        with open(path, "w", newline="\n") as fh:
            fh.write(self.to_text())

    @classmethod
    def load(cls, path) -> "SurrogateModel":
        with open(path) as fh:
            return cls.from_text(fh.read())


def build_surrogate(lams, outputs, order: int, ranges) -> SurrogateModel:
    """Least-squares fit of each output column on a total-order Legendre basis.

    `lams` is (R, d) training inputs, `outputs` is (R, N) model values at N
    locations. Leave-one-out errors come from the hat-matrix diagonal and
    are reported as per-location RMS.
    """
    lams = np.atleast_2d(np.asarray(lams, dtype=float))
    f = np.asarray(outputs, dtype=float)
    if f.ndim == 1:
        f = f[:, None]
    ranges = np.atleast_2d(np.asarray(ranges, dtype=float))
    r, d = lams.shape
    if f.shape[0] != r:
        raise ValueError("outputs must have one row per training sample")
    if ranges.shape != (d, 2):
        raise ValueError("ranges must be (d, 2)")
    basis = PcBasis.total_order(GermKind.LEGENDRE, d, order)
    k = basis.size
    if r < k:
        raise IllPosedDesignError(f"ill-posed design: {r} samples for {k} basis terms")
    z = scale_to_unit(lams, ranges)
    if np.any(np.abs(z) > 1.0 + 1e-12):
        raise ValueError("training inputs fall outside the given ranges")
    p = basis.eval(z)

    q, rmat, piv = linalg.qr(p, mode="economic", pivoting=True)
    rd = np.abs(np.diag(rmat))
    cond = rd[0] / rd[-1] if rd[-1] > 0 else np.inf
    if not np.isfinite(cond) or rd[-1] <= rd[0] * max(r, k) * np.finfo(float).eps:
        raise IllPosedDesignError(f"ill-posed design: rank-deficient P^T P (cond(P)={cond:.3g})")
    if cond ** 2 > 1e10:
        warnings.warn(f"poorly conditioned design, cond(P^T P)={cond**2:.3g}",
                      RuntimeWarning, stacklevel=2)
    sol = linalg.solve_triangular(rmat, q.T @ f)       # (K, N), pivoted order
    coeffs = np.empty_like(sol)
    coeffs[piv] = sol
    hat = np.sum(q * q, axis=1)
    resid = f - p @ coeffs
    with np.errstate(divide="ignore", invalid="ignore"):
        loo_resid = resid / (1.0 - hat)[:, None]
    loo_resid[~np.isfinite(loo_resid)] = 0.0
    loo = np.sqrt(np.mean(loo_resid ** 2, axis=0))
    return SurrogateModel(basis, ranges, coeffs.T.copy(), loo)


def surrogate_eval(model: SurrogateModel, i: int, lam) -> float:
    if not 0 <= i < model.n_locations:
        raise IndexError(f"location index {i} out of range")
    z = scale_to_unit(np.asarray(lam, dtype=float)[None, :], model.ranges)
    if np.any(np.abs(z) > 1.0 + 1e-12):
        warnings.warn("surrogate evaluated outside its training ranges",
                      ExtrapolationWarning, stacklevel=2)
    return float(model.basis.eval(z)[0] @ model.coeffs[i])


def brute_force_loo(lams, outputs, order: int, ranges) -> np.ndarray:
    """Refit R times with one sample held out; per-location RMS of held-out errors."""
    lams = np.atleast_2d(np.asarray(lams, dtype=float))
    f = np.asarray(outputs, dtype=float)
    f = f[:, None] if f.ndim == 1 else f
    basis = PcBasis.total_order(GermKind.LEGENDRE, lams.shape[1], order)
    p = basis.eval(scale_to_unit(lams, ranges))
    errs = np.empty_like(f)
    for r in range(f.shape[0]):
        keep = np.arange(f.shape[0]) != r
        a = p[keep]
        c = np.linalg.solve(a.T @ a, a.T @ f[keep])
        errs[r] = f[r] - p[r] @ c
    return np.sqrt(np.mean(errs ** 2, axis=0))


class SurrogateForwardModel(ForwardModel):
    """Exposes a surrogate as a forward model on its stored design locations.

    Design conditions passed to :meth:`evaluate` must be rows of ``xs``
    given at construction; each is mapped to its location index.
    """

    def __init__(self, surrogate: SurrogateModel, xs, warn: bool = False):
        self.surrogate = surrogate
        self.xs = as_design(xs)
        if self.xs.shape[0] != surrogate.n_locations:
            raise ValueError("number of locations does not match the surrogate")
        self.dim = surrogate.ranges.shape[0]
        self.xdim = self.xs.shape[1]
        self.warn = warn

    def _locate(self, xs) -> np.ndarray:
        xs = as_design(xs)
        if xs.shape == self.xs.shape and np.array_equal(xs, self.xs):
            return np.arange(xs.shape[0])
        idx = []
        for x in xs:
            hit = np.flatnonzero(np.all(np.isclose(self.xs, x, rtol=1e-12, atol=1e-12), axis=1))
            if hit.size == 0:
                raise KeyError(f"design condition {x} is not a surrogate location")
            idx.append(hit[0])
        return np.array(idx)

    def evaluate(self, xs, lams):
        idx = self._locate(xs)
        return self.surrogate.evaluate(lams, warn=self.warn)[:, idx]
