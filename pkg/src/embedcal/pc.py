"""Polynomial chaos machinery.

Orthogonal bases over a standard germ (probabilists' Hermite for a standard
normal germ, Legendre for a uniform germ on [-1, 1]), graded-lexicographic
multi-index sets, tensor Gauss quadrature, expansion moments and Sobol
main-effect indices.
"""
from __future__ import annotations

import enum
import io
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np


class GermKind(str, enum.Enum):
    HERMITE = "hermite"
    LEGENDRE = "legendre"


def _as_kind(kind) -> GermKind:
    return kind if isinstance(kind, GermKind) else GermKind(str(kind).lower())


def gen_multi_index(dim: int, order: int) -> list[tuple[int, ...]]:
    """All multi-indices of total order <= `order`, graded-lexicographic.

    Within one total order, indices are sorted so that larger leading entries
    come first, e.g. for dim=2: (0,0), (1,0), (0,1), (2,0), (1,1), (0,2), ...
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    if order < 0:
        raise ValueError("order must be >= 0")
    out: list[tuple[int, ...]] = []
    for total in range(order + 1):
        out.extend(_compositions(total, dim))
    return out


def _compositions(total: int, dim: int) -> list[tuple[int, ...]]:
    if dim == 1:
        return [(total,)]
    res = []
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, dim - 1):
            res.append((first,) + rest)
    return res


def univariate_values(kind, order: int, x) -> np.ndarray:
    """Evaluate univariate polynomials of orders 0..order at `x`.

    Returns an array of shape ``x.shape + (order + 1,)``. Uses the three-term
    recurrences; He_{n+1} = x He_n - n He_{n-1} and
    (n+1) P_{n+1} = (2n+1) x P_n - n P_{n-1}.
    """
    kind = _as_kind(kind)
    x = np.asarray(x, dtype=float)
    vals = np.empty(x.shape + (order + 1,))
    vals[..., 0] = 1.0
    if order >= 1:
        vals[..., 1] = x
    for n in range(1, order):
        if kind is GermKind.HERMITE:
            vals[..., n + 1] = x * vals[..., n] - n * vals[..., n - 1]
        else:
            vals[..., n + 1] = ((2 * n + 1) * x * vals[..., n] - n * vals[..., n - 1]) / (n + 1)
    return vals


def univariate_norm_sq(kind, n: int) -> float:
    if _as_kind(kind) is GermKind.HERMITE:
        return float(math.factorial(n))
    return 1.0 / (2 * n + 1)


@dataclass(frozen=True, eq=False)
class PcBasis:
    """Orthogonal polynomial basis over a `dim`-dimensional germ.

    `indices` is an (K, dim) integer array; row 0 is the constant term.
    """

    kind: GermKind
    dim: int
    indices: np.ndarray
    norms_sq: np.ndarray

    @classmethod
    def total_order(cls, kind, dim: int, order: int) -> "PcBasis":
        return _cached_basis(_as_kind(kind), dim, order)

    @classmethod
    def from_indices(cls, kind, indices) -> "PcBasis":
        kind = _as_kind(kind)
        idx = np.asarray(indices, dtype=int)
        if idx.ndim != 2 or idx.shape[0] == 0:
            raise ValueError("indices must be a non-empty 2D array")
        if np.any(idx < 0):
            raise ValueError("multi-index entries must be non-negative")
        if np.any(idx[0] != 0):
            raise ValueError("first multi-index must be the constant term")
        if len({tuple(r) for r in idx}) != len(idx):
            raise ValueError("multi-indices must be unique")
        idx.setflags(write=False)
        norms = _norms(kind, idx)
        norms.setflags(write=False)
        return cls(kind, idx.shape[1], idx, norms)

    @property
    def size(self) -> int:
        return self.indices.shape[0]

    @property
    def order(self) -> int:
        return int(self.indices.sum(axis=1).max())

    def same_as(self, other: "PcBasis") -> bool:
        return (
            self is other
            or (self.kind == other.kind and self.indices.shape == other.indices.shape
                and np.array_equal(self.indices, other.indices))
        )

    def eval(self, points) -> np.ndarray:
        """Basis values at one point (shape (K,)) or many points (shape (Q, K))."""
        pts = np.asarray(points, dtype=float)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)
        if pts.shape[1] != self.dim:
            raise ValueError(
                f"point dimension {pts.shape[1]} does not match basis dimension {self.dim}"
            )
        maxord = int(self.indices.max()) if self.indices.size else 0
        uni = univariate_values(self.kind, maxord, pts)  # (Q, dim, maxord+1)
        out = np.ones((pts.shape[0], self.size))
        for j in range(self.dim):
            out *= uni[:, j, self.indices[:, j]]
        return out[0] if single else out


@lru_cache(maxsize=None)
def _cached_basis(kind: GermKind, dim: int, order: int) -> PcBasis:
    return PcBasis.from_indices(kind, gen_multi_index(dim, order))


def _norms(kind: GermKind, indices: np.ndarray) -> np.ndarray:
    maxord = int(indices.max()) if indices.size else 0
    table = np.array([univariate_norm_sq(kind, n) for n in range(maxord + 1)])
    return np.prod(table[indices], axis=1)


def eval_basis(basis: PcBasis, point) -> np.ndarray:
    return basis.eval(point)


def basis_norms(basis: PcBasis) -> np.ndarray:
    return basis.norms_sq


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    nodes: np.ndarray    # (Q, dim)
    weights: np.ndarray  # (Q,), sum to 1


@lru_cache(maxsize=None)
def gauss_quadrature(kind, dim: int, pts_per_dim: int) -> QuadratureRule:
    """Full tensor Gauss rule normalized to the germ probability measure."""
    kind = _as_kind(kind)
    if pts_per_dim < 1:
        raise ValueError("pts_per_dim must be >= 1")
    if kind is GermKind.HERMITE:
        x, w = np.polynomial.hermite_e.hermegauss(pts_per_dim)
    else:
        x, w = np.polynomial.legendre.leggauss(pts_per_dim)
    w = w / w.sum()
    grids = np.meshgrid(*([x] * dim), indexing="ij")
    wgrids = np.meshgrid(*([w] * dim), indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=1)
    weights = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(nodes, weights)


@dataclass(frozen=True, eq=False)
class PcExpansion:
    basis: PcBasis
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.shape != (self.basis.size,):
            raise ValueError(
                f"expected {self.basis.size} coefficients, got shape {c.shape}"
            )
        object.__setattr__(self, "coeffs", c)

    def __call__(self, points):
        return self.basis.eval(points) @ self.coeffs

    @property
    def mean(self) -> float:
        return float(self.coeffs[0])

    @property
    def variance(self) -> float:
        return float(np.sum(self.coeffs[1:] ** 2 * self.basis.norms_sq[1:]))

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return self(sample_germ(self.basis.kind, self.basis.dim, n, rng))

    def to_text(self) -> str:
        buf = io.StringIO()
        buf.write(f"# kind={self.basis.kind.value} dim={self.basis.dim}\n")
        for row, c in zip(self.basis.indices, self.coeffs):
            buf.write(" ".join(str(int(v)) for v in row) + f" {float(c)!r}\n")
        return buf.getvalue()

    @classmethod
    def from_text(cls, text: str) -> "PcExpansion":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        header = dict(tok.split("=") for tok in lines[0].lstrip("# ").split())
        dim = int(header["dim"])
        rows = [ln.split() for ln in lines[1:]]
        idx = [[int(v) for v in r[:dim]] for r in rows]
        coeffs = [float(r[dim]) for r in rows]
        return cls(PcBasis.from_indices(header["kind"], idx), np.array(coeffs))


def sample_germ(kind, dim: int, n: int, rng: np.random.Generator) -> np.ndarray:
    if _as_kind(kind) is GermKind.HERMITE:
        return rng.standard_normal((n, dim))
    return rng.uniform(-1.0, 1.0, (n, dim))


def pce_eval(expansion: PcExpansion, point) -> float:
    return float(expansion(np.asarray(point, dtype=float)))


def pce_moments(expansion: PcExpansion) -> tuple[float, float]:
    return expansion.mean, expansion.variance


def pce_cov(a: PcExpansion, b: PcExpansion) -> float:
    if not a.basis.same_as(b.basis):
        raise ValueError("expansions do not share a basis")
    return float(np.sum(a.coeffs[1:] * b.coeffs[1:] * a.basis.norms_sq[1:]))


def sobol_main_index(expansion: PcExpansion, dims: Iterable[int]) -> float:
    """Fraction of variance carried by terms that involve only `dims`.

    `dims` are 0-based germ dimensions.
    """
    total = expansion.variance
    if total <= 0.0:
        raise ValueError("degenerate expansion: zero total variance")
    dims = set(int(d) for d in dims)
    others = [j for j in range(expansion.basis.dim) if j not in dims]
    idx = expansion.basis.indices
    mask = np.ones(idx.shape[0], dtype=bool)
    if others:
        mask &= np.all(idx[:, others] == 0, axis=1)
    mask[0] = False
    part = np.sum(expansion.coeffs[mask] ** 2 * expansion.basis.norms_sq[mask])
    return float(part / total)


def multi_index_count(dim: int, order: int) -> int:
    return math.comb(dim + order, order)


def constant_expansion(value: float, kind=GermKind.HERMITE, dim: int = 1) -> PcExpansion:
    basis = PcBasis.total_order(kind, dim, 0)
    return PcExpansion(basis, np.array([float(value)]))


__all__: Sequence[str] = [
    "GermKind", "PcBasis", "PcExpansion", "QuadratureRule",
    "gen_multi_index", "eval_basis", "basis_norms", "gauss_quadrature",
    "pce_eval", "pce_moments", "pce_cov", "sobol_main_index", "sample_germ",
    "univariate_values", "multi_index_count", "constant_expansion",
]
