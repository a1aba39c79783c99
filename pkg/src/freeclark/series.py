"""
Truncated free formal power series with matrix coefficients.

F(Z) = Σ_α Z^α F_α over words |α| ≤ N with m×m complex coefficients. Left
products convolve over γ = αβ with F's word on the left; right products
convolve over γ = βα so that F•_R G = T(T(F)·T(G)).
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import DimensionMismatchError, NonUnitalViolationError
from .freecore import (
    EMPTY,
    MultiIndex,
    Side,
    TruncatedFock,
    Word,
    abelianize,
    enumerate_multi_indices,
    enumerate_words,
    transpose,
)


def _as_matrix(value: np.ndarray | complex | float, m: int) -> np.ndarray:
    arr = np.asarray(value, dtype=complex)
    if arr.ndim == 0:
        return arr * np.eye(m, dtype=complex)
    if arr.shape != (m, m):
        raise DimensionMismatchError(f"Expected {m}x{m} coefficient, got shape {arr.shape}")
    return arr


# ============================================================================
# Types
# ============================================================================


@dataclass(frozen=True, eq=False)
class FreeSeries:
    """Σ_α Z^α F_α truncated at degree N; missing words are zero."""

    d: int
    m: int
    N: int
    coeffs: Mapping[Word, np.ndarray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        clean: dict[Word, np.ndarray] = {}
        for w, c in self.coeffs.items():
            w = tuple(w)
            if len(w) > self.N:
                continue
            if any(letter < 1 or letter > self.d for letter in w):
                raise DimensionMismatchError(f"Word {w} uses a letter outside 1..{self.d}")
            clean[w] = _as_matrix(c, self.m)
        object.__setattr__(self, "coeffs", clean)

    @classmethod
    def zero(cls, d: int, m: int, N: int) -> FreeSeries:
        return cls(d, m, N, {})

    @classmethod
    def constant(cls, d: int, m: int, N: int, c: np.ndarray | complex) -> FreeSeries:
        return cls(d, m, N, {EMPTY: _as_matrix(c, m)})

    @classmethod
    def identity(cls, d: int, m: int, N: int) -> FreeSeries:
        return cls.constant(d, m, N, 1.0)

    def coeff(self, w: Word) -> np.ndarray:
        c = self.coeffs.get(tuple(w))
        return c if c is not None else np.zeros((self.m, self.m), dtype=complex)

    @property
    def degree(self) -> int:
        """Largest word length carrying a nonzero coefficient (0 for the zero series)."""
        lengths = [len(w) for w, c in self.coeffs.items() if np.any(c != 0)]
        return max(lengths, default=0)

    def with_truncation(self, N: int) -> FreeSeries:
        return FreeSeries(self.d, self.m, N, self.coeffs)

    def max_difference(self, other: FreeSeries, max_degree: int | None = None) -> float:
        """Largest entrywise coefficient difference over words of length ≤ max_degree."""
        top = min(self.N, other.N) if max_degree is None else max_degree
        err = 0.0
        for w in set(self.coeffs) | set(other.coeffs):
            if len(w) <= top:
                err = max(err, float(np.max(np.abs(self.coeff(w) - other.coeff(w)))))
        return err

    def __add__(self, other: FreeSeries) -> FreeSeries:
        _check_compatible(self, other)
        coeffs = {w: self.coeff(w) + other.coeff(w) for w in set(self.coeffs) | set(other.coeffs)}
        return FreeSeries(self.d, self.m, self.N, coeffs)

    def __sub__(self, other: FreeSeries) -> FreeSeries:
        return self + other.scale(-1.0)

    def scale(self, c: complex) -> FreeSeries:
        return FreeSeries(self.d, self.m, self.N, {w: c * v for w, v in self.coeffs.items()})

    def right_apply(self, U: np.ndarray) -> FreeSeries:
        """Coefficientwise F_α U, i.e. the series F(Z)U."""
        return FreeSeries(self.d, self.m, self.N, {w: v @ U for w, v in self.coeffs.items()})


@dataclass(frozen=True, eq=False)
class CommSeries:
    """Σ_n z^n b_n over multi-indices |n| ≤ N."""

    d: int
    m: int
    N: int
    coeffs: Mapping[MultiIndex, np.ndarray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        clean: dict[MultiIndex, np.ndarray] = {}
        for n, c in self.coeffs.items():
            n = tuple(int(k) for k in n)
            if len(n) != self.d:
                raise DimensionMismatchError(f"Multi-index {n} does not have {self.d} entries")
            if sum(n) > self.N:
                continue
            clean[n] = _as_matrix(c, self.m)
        object.__setattr__(self, "coeffs", clean)

    @classmethod
    def constant(cls, d: int, m: int, N: int, c: np.ndarray | complex) -> CommSeries:
        return cls(d, m, N, {(0,) * d: _as_matrix(c, m)})

    @property
    def origin(self) -> MultiIndex:
        return (0,) * self.d

    def coeff(self, n: MultiIndex) -> np.ndarray:
        c = self.coeffs.get(tuple(n))
        return c if c is not None else np.zeros((self.m, self.m), dtype=complex)

    @property
    def degree(self) -> int:
        lengths = [sum(n) for n, c in self.coeffs.items() if np.any(c != 0)]
        return max(lengths, default=0)

    def max_difference(self, other: CommSeries, max_degree: int | None = None) -> float:
        top = min(self.N, other.N) if max_degree is None else max_degree
        err = 0.0
        for n in set(self.coeffs) | set(other.coeffs):
            if sum(n) <= top:
                err = max(err, float(np.max(np.abs(self.coeff(n) - other.coeff(n)))))
        return err

    def __add__(self, other: CommSeries) -> CommSeries:
        keys = set(self.coeffs) | set(other.coeffs)
        return CommSeries(self.d, self.m, self.N, {n: self.coeff(n) + other.coeff(n) for n in keys})

    def scale(self, c: complex) -> CommSeries:
        return CommSeries(self.d, self.m, self.N, {n: c * v for n, v in self.coeffs.items()})


@dataclass(frozen=True, eq=False)
class NCPoint:
    """A d-tuple of n×n matrices."""

    Z: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        mats = tuple(np.asarray(z, dtype=complex) for z in self.Z)
        if not mats:
            raise DimensionMismatchError("An NC point needs at least one matrix")
        n = mats[0].shape[0]
        if any(z.shape != (n, n) for z in mats):
            raise DimensionMismatchError("NC point matrices must all be square of equal size")
        object.__setattr__(self, "Z", mats)

    @property
    def n(self) -> int:
        return int(self.Z[0].shape[0])

    @property
    def d(self) -> int:
        return len(self.Z)

    @property
    def row_norm(self) -> float:
        return float(np.linalg.norm(np.hstack(self.Z), 2))

    def nilpotency_order(self, max_order: int = 64) -> int | None:
        """Smallest k with Z^α = 0 for all |α| = k, or None if not reached by max_order."""
        basis = np.eye(self.n, dtype=complex)
        for k in range(max_order + 1):
            if basis.shape[1] == 0:
                return k
            images = np.hstack([z @ basis for z in self.Z])
            basis = sla.orth(images, rcond=1e-13) if np.any(images) else images[:, :0]
        return None


def _check_compatible(F: FreeSeries, G: FreeSeries) -> None:
    if F.d != G.d or F.m != G.m:
        raise DimensionMismatchError(
            f"Incompatible series: (d={F.d}, m={F.m}) vs (d={G.d}, m={G.m})"
        )


# ============================================================================
# Free series operations
# ============================================================================


def series_multiply(F: FreeSeries, G: FreeSeries, side: Side = Side.LEFT) -> FreeSeries:
    """Left: (FG)_γ = Σ_{αβ=γ} F_α G_β. Right: (F•_R G)_γ = Σ_{βα=γ} F_α G_β."""
    _check_compatible(F, G)
    N = min(F.N, G.N)
    out: dict[Word, np.ndarray] = {}
    for a, fa in F.coeffs.items():
        for b, gb in G.coeffs.items():
            if len(a) + len(b) > N:
                continue
            w = (*a, *b) if side == Side.LEFT else (*b, *a)
            prod = fa @ gb
            out[w] = out[w] + prod if w in out else prod
    return FreeSeries(F.d, F.m, N, out)


def invert_series(F: FreeSeries, cond_guard: float = 1e12, side: Side = Side.LEFT) -> FreeSeries:
    """Inverse by degree recursion G_γ = −F_∅^{-1} Σ_{αβ=γ, α≠∅} F_α G_β.

    The right-product inverse is the transpose of the left inverse of T(F).
    """
    if side == Side.RIGHT:
        return transpose_series(invert_series(transpose_series(F), cond_guard))
    f0 = F.coeff(EMPTY)
    if not np.all(np.isfinite(f0)) or np.linalg.cond(f0) > cond_guard:
        raise NonUnitalViolationError("Constant coefficient is singular; series is not invertible")
    f0_inv = np.linalg.inv(f0)
    G: dict[Word, np.ndarray] = {EMPTY: f0_inv}
    for gamma in enumerate_words(F.d, F.N)[1:]:
        acc = np.zeros((F.m, F.m), dtype=complex)
        for k in range(1, len(gamma) + 1):
            fa = F.coeffs.get(gamma[:k])
            if fa is not None:
                acc += fa @ G[gamma[k:]]
        G[gamma] = -f0_inv @ acc
    return FreeSeries(F.d, F.m, F.N, G)


def transpose_series(F: FreeSeries) -> FreeSeries:
    return FreeSeries(F.d, F.m, F.N, {transpose(w): c for w, c in F.coeffs.items()})


def conjugate_series(F: FreeSeries) -> FreeSeries:
    """Coefficientwise adjoint F_α*."""
    return FreeSeries(F.d, F.m, F.N, {w: c.conj().T for w, c in F.coeffs.items()})


def mult_matrix(F: FreeSeries, side: Side, fock: TruncatedFock) -> np.ndarray:
    """M^L_F (e_β⊗h ↦ Σ e_{μβ}⊗F_μ h) or M^R_F (e_β⊗h ↦ Σ e_{βμ}⊗F_μ h)."""
    if fock.d != F.d or fock.m != F.m:
        raise DimensionMismatchError(
            f"Series (d={F.d}, m={F.m}) does not act on Fock space (d={fock.d}, m={fock.m})"
        )
    M = np.zeros((fock.dim, fock.dim), dtype=complex)
    for beta in fock.words:
        cols = fock.block(beta)
        for mu, fmu in F.coeffs.items():
            if len(mu) + len(beta) > fock.N:
                continue
            target = (*mu, *beta) if side == Side.LEFT else (*beta, *mu)
            M[fock.block(target), cols] += fmu
    return M


def series_columns(F: FreeSeries, fock: TruncatedFock) -> np.ndarray:
    """F as the dim×m block column (F_α)_α, i.e. the image of C^m under F."""
    out = np.zeros((fock.dim, F.m), dtype=complex)
    for w, c in F.coeffs.items():
        if len(w) <= fock.N:
            out[fock.block(w), :] = c
    return out


def series_from_columns(cols: np.ndarray, fock: TruncatedFock) -> FreeSeries:
    return FreeSeries(
        fock.d, cols.shape[1], fock.N, {w: cols[fock.block(w), :] for w in fock.words}
    )


def word_powers(p: NCPoint, words: Iterable[Word]) -> dict[Word, np.ndarray]:
    """Z^α = Z_{i_1}···Z_{i_k} for the requested words, built by prefix recursion."""
    cache: dict[Word, np.ndarray] = {EMPTY: np.eye(p.n, dtype=complex)}

    def power(w: Word) -> np.ndarray:
        if w not in cache:
            cache[w] = power(w[:-1]) @ p.Z[w[-1] - 1]
        return cache[w]

    return {w: power(w) for w in words}


def eval_nc(F: FreeSeries, p: NCPoint) -> np.ndarray:
    """Σ_α Z^α ⊗ F_α at the point p."""
    if p.d != F.d:
        raise DimensionMismatchError(f"Point has {p.d} matrices, series has d={F.d}")
    powers = word_powers(p, F.coeffs)
    out = np.zeros((p.n * F.m, p.n * F.m), dtype=complex)
    for w, c in F.coeffs.items():
        out += np.kron(powers[w], c)
    return out


def symmetrize_series(F: FreeSeries) -> CommSeries:
    out: dict[MultiIndex, np.ndarray] = {}
    for w, c in F.coeffs.items():
        n = abelianize(w, F.d)
        out[n] = out[n] + c if n in out else c.copy()
    return CommSeries(F.d, F.m, F.N, out)


@dataclass(frozen=True)
class NormBounds:
    lower: float
    upper: float

    @property
    def certified_contractive(self) -> bool:
        return self.upper <= 1.0


def schur_norm_bounds(F: FreeSeries, fock: TruncatedFock | None = None) -> NormBounds:
    """Compressed multiplier norm (lower) and ℓ¹ coefficient norm (upper)."""
    fock = fock or TruncatedFock(F.d, F.m, F.N)
    lower = float(np.linalg.norm(mult_matrix(F, Side.LEFT, fock), 2))
    upper = float(sum(np.linalg.norm(c, 2) for c in F.coeffs.values()))
    return NormBounds(lower=lower, upper=upper)


# ============================================================================
# Commutative series operations
# ============================================================================


def comm_multiply(b: CommSeries, c: CommSeries) -> CommSeries:
    N = min(b.N, c.N)
    out: dict[MultiIndex, np.ndarray] = {}
    for n, bn in b.coeffs.items():
        for k, ck in c.coeffs.items():
            if sum(n) + sum(k) > N:
                continue
            key = tuple(x + y for x, y in zip(n, k, strict=True))
            prod = bn @ ck
            out[key] = out[key] + prod if key in out else prod
    return CommSeries(b.d, b.m, N, out)


def comm_invert(b: CommSeries, cond_guard: float = 1e12) -> CommSeries:
    b0 = b.coeff(b.origin)
    if np.linalg.cond(b0) > cond_guard:
        raise NonUnitalViolationError("Constant coefficient is singular; series is not invertible")
    b0_inv = np.linalg.inv(b0)
    out: dict[MultiIndex, np.ndarray] = {b.origin: b0_inv}
    for n in enumerate_multi_indices(b.d, b.N)[1:]:
        acc = np.zeros((b.m, b.m), dtype=complex)
        for k, bk in b.coeffs.items():
            if sum(k) == 0:
                continue
            rest = tuple(x - y for x, y in zip(n, k, strict=True))
            if min(rest) >= 0:
                acc += bk @ out[rest]
        out[n] = -b0_inv @ acc
    return CommSeries(b.d, b.m, b.N, out)


def eval_comm(b: CommSeries, z: np.ndarray) -> np.ndarray:
    """Σ_n z^n b_n at a scalar point z ∈ C^d."""
    z = np.asarray(z, dtype=complex)
    out = np.zeros((b.m, b.m), dtype=complex)
    for n, c in b.coeffs.items():
        out += np.prod(z ** np.asarray(n)) * c
    return out
