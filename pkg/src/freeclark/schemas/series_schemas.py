"""
JSON schemas for series, moments, NC points and colligations.

Complex numbers are [re, im] pairs and matrices are row-major nested lists.
Words are digit strings ("" is the empty word); multi-indices are
comma-separated counts such as "2,0".
"""

from __future__ import annotations

from enum import StrEnum, auto
from typing import Annotated

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from freeclark.commutative import CommMomentFunctional
from freeclark.freecore import MultiIndex, parse_word, word_str
from freeclark.herglotz_ac import MomentFunctional
from freeclark.realization import Colligation
from freeclark.series import CommSeries, FreeSeries, NCPoint

ComplexEntry = Annotated[list[float], Field(min_length=2, max_length=2)]
ComplexMatrix = list[list[ComplexEntry]]

# ============================================================================
# Codecs
# ============================================================================


def encode_matrix(A: np.ndarray) -> ComplexMatrix:
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    return [[[float(z.real), float(z.imag)] for z in row] for row in A]


def decode_matrix(M: ComplexMatrix) -> np.ndarray:
    if not M:
        return np.zeros((0, 0), dtype=complex)
    return np.array([[complex(re, im) for re, im in row] for row in M], dtype=complex)


def multi_index_str(n: MultiIndex) -> str:
    return ",".join(str(k) for k in n)


def parse_multi_index(s: str, d: int) -> MultiIndex:
    n = tuple(int(k) for k in s.split(",")) if s else ()
    if len(n) != d or min(n, default=0) < 0:
        raise ValueError(f"Multi-index {s!r} is not a non-negative {d}-tuple")
    return n


class SeriesMode(StrEnum):
    FREE = auto()
    COMM = auto()


# ============================================================================
# Series and moments
# ============================================================================


class FreeSeriesModel(BaseModel):
    """Free series Σ_α Z^α F_α keyed by word strings."""

    d: int = Field(ge=1, le=9)
    m: int = Field(ge=1)
    N: int = Field(ge=0)
    coeffs: dict[str, ComplexMatrix] = Field(default_factory=dict)

    @model_validator(mode="after")
    def validate_words(self) -> FreeSeriesModel:
        for key, value in self.coeffs.items():
            parse_word(key, self.d)
            if np.shape(value)[:2] != (self.m, self.m):
                raise ValueError(f"Coefficient {key!r} must be {self.m}x{self.m}")
        return self

    @classmethod
    def from_series(cls, F: FreeSeries) -> FreeSeriesModel:
        return cls(
            d=F.d,
            m=F.m,
            N=F.N,
            coeffs={word_str(w): encode_matrix(c) for w, c in sorted(F.coeffs.items())},
        )

    def to_series(self) -> FreeSeries:
        return FreeSeries(
            self.d,
            self.m,
            self.N,
            {parse_word(k, self.d): decode_matrix(v) for k, v in self.coeffs.items()},
        )


class CommSeriesModel(BaseModel):
    """Commutative series Σ_n z^n b_n keyed by multi-index strings."""

    d: int = Field(ge=1, le=9)
    m: int = Field(ge=1)
    N: int = Field(ge=0)
    coeffs: dict[str, ComplexMatrix] = Field(default_factory=dict)

    @model_validator(mode="after")
    def validate_indices(self) -> CommSeriesModel:
        for key in self.coeffs:
            parse_multi_index(key, self.d)
        return self

    @classmethod
    def from_series(cls, b: CommSeries) -> CommSeriesModel:
        return cls(
            d=b.d,
            m=b.m,
            N=b.N,
            coeffs={multi_index_str(n): encode_matrix(c) for n, c in sorted(b.coeffs.items())},
        )

    def to_series(self) -> CommSeries:
        return CommSeries(
            self.d,
            self.m,
            self.N,
            {parse_multi_index(k, self.d): decode_matrix(v) for k, v in self.coeffs.items()},
        )


class MomentModel(BaseModel):
    d: int = Field(ge=1, le=9)
    m: int = Field(ge=1)
    N: int = Field(ge=0)
    phi_I: ComplexMatrix
    moments: dict[str, ComplexMatrix] = Field(default_factory=dict)

    @classmethod
    def from_functional(cls, phi: MomentFunctional) -> MomentModel:
        return cls(
            d=phi.d,
            m=phi.m,
            N=phi.N,
            phi_I=encode_matrix(phi.phi_I),
            moments={word_str(w): encode_matrix(v) for w, v in sorted(phi.moments.items())},
        )

    def to_functional(self) -> MomentFunctional:
        return MomentFunctional(
            self.d,
            self.m,
            self.N,
            decode_matrix(self.phi_I),
            {parse_word(k, self.d): decode_matrix(v) for k, v in self.moments.items()},
        )


class CommMomentModel(BaseModel):
    d: int = Field(ge=1, le=9)
    m: int = Field(ge=1)
    N: int = Field(ge=0)
    mu_I: ComplexMatrix
    moments: dict[str, ComplexMatrix] = Field(default_factory=dict)

    @classmethod
    def from_functional(cls, mu: CommMomentFunctional) -> CommMomentModel:
        return cls(
            d=mu.d,
            m=mu.m,
            N=mu.N,
            mu_I=encode_matrix(mu.mu_I),
            moments={multi_index_str(n): encode_matrix(v) for n, v in sorted(mu.moments.items())},
        )


# ============================================================================
# Points and colligations
# ============================================================================


class NCPointModel(BaseModel):
    n: int = Field(ge=1)
    Z: list[ComplexMatrix] = Field(min_length=1)

    @field_validator("Z")
    @classmethod
    def validate_square(cls, Z: list[ComplexMatrix]) -> list[ComplexMatrix]:
        shapes = {(len(z), len(z[0]) if z else 0) for z in Z}
        if len(shapes) != 1 or next(iter(shapes))[0] != next(iter(shapes))[1]:
            raise ValueError("Point matrices must be square and of equal size")
        return Z

    @model_validator(mode="after")
    def validate_size(self) -> NCPointModel:
        if len(self.Z[0]) != self.n:
            raise ValueError(f"Point matrices must be {self.n}x{self.n}")
        return self

    @classmethod
    def from_point(cls, p: NCPoint) -> NCPointModel:
        return cls(n=p.n, Z=[encode_matrix(z) for z in p.Z])

    def to_point(self) -> NCPoint:
        return NCPoint(tuple(decode_matrix(z) for z in self.Z))


class ColligationModel(BaseModel):
    d: int
    m: int
    state_dim: int
    A: list[ComplexMatrix]
    B: ComplexMatrix
    C: ComplexMatrix
    D: ComplexMatrix

    @classmethod
    def from_colligation(cls, c: Colligation) -> ColligationModel:
        return cls(
            d=c.d,
            m=c.m,
            state_dim=c.state_dim,
            A=[encode_matrix(a) for a in c.A],
            B=encode_matrix(c.Bblk),
            C=encode_matrix(c.Cblk),
            D=encode_matrix(c.Dblk),
        )


class EvaluationModel(BaseModel):
    """Transfer-function value at a point, with the nilpotent self-check when it applies."""

    mode: SeriesMode
    state_dim: int
    value: ComplexMatrix
    nilpotent_error: float | None = None
