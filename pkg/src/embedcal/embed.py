"""Stochastic input embeddings Lambda = lambda + delta(alpha, xi).

The flat parameter layout used for inference is::

    [lambda_0 .. lambda_{d-1} | alpha block | log_sigma (optional)]

The alpha block is row-major over embedded parameters (in increasing order)
and, within one embedded parameter, over the germ terms it uses.  For the
triangular form and d = 2 this is (a_11, a_12, a_22), where a_kj multiplies
xi_k in Lambda_j.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .pc import GermKind, PcBasis, PcExpansion


class Variant(str, enum.Enum):
    CLASSICAL = "classical"
    FULL = "full"
    TRIANGULAR = "triangular"
    UNIFORM = "uniform"
    GENERAL = "general"


class SupportViolation(ValueError):
    """Embedding coefficients outside the identifiable region."""


@dataclass(frozen=True)
class EmbeddingSpec:
    variant: Variant
    dim: int
    embedded: tuple[int, ...] = ()
    order: int = 1

    def __post_init__(self):
        variant = Variant(self.variant)
        object.__setattr__(self, "variant", variant)
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        emb = self.embedded
        if variant is Variant.CLASSICAL:
            emb = ()
        elif emb is None or len(emb) == 0:
            emb = tuple(range(self.dim))
        emb = tuple(sorted(int(j) for j in emb))
        if len(set(emb)) != len(emb) or any(j < 0 or j >= self.dim for j in emb):
            raise ValueError(f"invalid embedded set {emb} for dim={self.dim}")
        object.__setattr__(self, "embedded", emb)
        if variant is Variant.GENERAL and self.order < 1:
            raise ValueError("general-order embedding needs order >= 1")

    @property
    def germ_dim(self) -> int:
        return max(len(self.embedded), 1) if self.variant is not Variant.CLASSICAL else 1

    @property
    def germ_kind(self) -> GermKind:
        return GermKind.LEGENDRE if self.variant is Variant.UNIFORM else GermKind.HERMITE

    @property
    def input_order(self) -> int:
        if self.variant is Variant.CLASSICAL:
            return 0
        if self.variant is Variant.GENERAL:
            return self.order
        return 1

    @property
    def input_basis(self) -> PcBasis:
        return PcBasis.total_order(self.germ_kind, self.germ_dim, self.input_order)

    def alpha_terms(self, pos: int) -> list[int]:
        """Basis-term indices (into `input_basis`) carried by the pos-th embedded parameter."""
        m = len(self.embedded)
        v = self.variant
        if v is Variant.FULL:
            return list(range(1, m + 1))
        if v is Variant.TRIANGULAR:
            return list(range(1, pos + 2))
        if v is Variant.UNIFORM:
            return [pos + 1]
        if v is Variant.GENERAL:
            return list(range(1, self.input_basis.size))
        return []

    @property
    def alpha_count(self) -> int:
        return sum(len(self.alpha_terms(p)) for p in range(len(self.embedded)))

    def diagonal_positions(self) -> list[int]:
        """Positions in the alpha block that must be non-negative."""
        out = []
        if self.variant not in (Variant.TRIANGULAR, Variant.UNIFORM):
            return out
        start = 0
        for p in range(len(self.embedded)):
            terms = self.alpha_terms(p)
            out.append(start + terms.index(p + 1))
            start += len(terms)
        return out


def param_count(spec: EmbeddingSpec, infer_sigma: bool = False) -> int:
    return spec.dim + spec.alpha_count + (1 if infer_sigma else 0)


@dataclass
class AugmentedParams:
    lam: np.ndarray
    alpha: np.ndarray = field(default_factory=lambda: np.zeros(0))
    log_sigma: Optional[float] = None

    def __post_init__(self):
        self.lam = np.atleast_1d(np.asarray(self.lam, dtype=float))
        self.alpha = np.atleast_1d(np.asarray(self.alpha, dtype=float))

    @property
    def sigma(self) -> Optional[float]:
        return None if self.log_sigma is None else float(np.exp(self.log_sigma))

    def flatten(self) -> np.ndarray:
        parts = [self.lam, self.alpha]
        if self.log_sigma is not None:
            parts.append(np.array([self.log_sigma]))
        return np.concatenate(parts)

    @classmethod
    def from_flat(cls, spec: EmbeddingSpec, vec, infer_sigma: bool = False) -> "AugmentedParams":
        vec = np.asarray(vec, dtype=float)
        expected = param_count(spec, infer_sigma)
        if vec.shape != (expected,):
            raise ValueError(f"expected {expected} parameters, got {vec.shape}")
        d, na = spec.dim, spec.alpha_count
        return cls(vec[:d].copy(), vec[d:d + na].copy(),
                   float(vec[d + na]) if infer_sigma else None)


def coefficient_matrix(spec: EmbeddingSpec, params: AugmentedParams) -> np.ndarray:
    """(K_in, d) matrix of input PC coefficients; row 0 holds lambda."""
    if params.lam.shape != (spec.dim,) or params.alpha.shape != (spec.alpha_count,):
        raise ValueError("parameter layout does not match embedding spec")
    basis = spec.input_basis
    coef = np.zeros((basis.size, spec.dim))
    coef[0] = params.lam
    pos = 0
    for p, j in enumerate(spec.embedded):
        terms = spec.alpha_terms(p)
        coef[terms, j] = params.alpha[pos:pos + len(terms)]
        pos += len(terms)
    return coef


def check_support(spec: EmbeddingSpec, params: AugmentedParams) -> None:
    diag = spec.diagonal_positions()
    if diag and np.any(params.alpha[diag] < 0):
        raise SupportViolation(
            f"negative diagonal embedding coefficient in {params.alpha[diag]}"
        )


def input_pce(spec: EmbeddingSpec, params: AugmentedParams) -> list[PcExpansion]:
    check_support(spec, params)
    coef = coefficient_matrix(spec, params)
    basis = spec.input_basis
    return [PcExpansion(basis, coef[:, j].copy()) for j in range(spec.dim)]


def sample_lambda(spec: EmbeddingSpec, params: AugmentedParams, germ_point) -> np.ndarray:
    """Evaluate Lambda at one germ point (shape (m,)) or many (shape (Q, m))."""
    germ = np.asarray(germ_point, dtype=float)
    m = len(spec.embedded)
    if spec.variant is Variant.CLASSICAL:
        if germ.ndim == 2:
            return np.tile(params.lam, (germ.shape[0], 1))
        return params.lam.copy()
    if germ.shape[-1] != m:
        raise ValueError(f"germ point must have length {m}")
    coef = coefficient_matrix(spec, params)
    return spec.input_basis.eval(germ) @ coef


def lower_triangular_factor(spec: EmbeddingSpec, params: AugmentedParams) -> np.ndarray:
    """Linear map L with Lambda_E = lambda_E + L xi, for linear MVN embeddings."""
    coef = coefficient_matrix(spec, params)
    return coef[1:, list(spec.embedded)].T.copy()


__all__: Sequence[str] = [
    "Variant", "EmbeddingSpec", "AugmentedParams", "SupportViolation",
    "param_count", "input_pce", "sample_lambda", "coefficient_matrix",
    "check_support", "lower_triangular_factor",
]
