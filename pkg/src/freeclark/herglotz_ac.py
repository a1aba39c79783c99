"""
Schur pairs, Herglotz pairs and completely positive moment functionals.

A non-unital free Schur function B^L has a left Herglotz transform
H^L = (I − B^L)^{-1}(I + B^L) and an Aleksandrov-Clark moment functional
μ_B with μ_B(I) = Re H_∅ and μ_B(L^γ) = ½ (H^L_{γ^T})*. The right member of the
pair is always the transpose series, so B^R = T(B^L) and H^R = T(H^L).

The bijections hold modulo imaginary constants. The inverse maps take Im H_∅
as an optional argument and default it to zero.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np
from loguru import logger

from .errors import ConfigurationError, NonUnitalViolationError, NotHerglotzError
from .freecore import (
    EMPTY,
    Cancellation,
    CancellationKind,
    Side,
    Word,
    enumerate_words,
    transpose,
)
from .series import FreeSeries, invert_series, series_multiply, transpose_series


@dataclass(frozen=True, eq=False)
class MomentFunctional:
    """φ(I) and φ(L^γ) for 1 ≤ |γ| ≤ N; φ(L^γ*) := φ(L^γ)* is implicit."""

    d: int
    m: int
    N: int
    phi_I: np.ndarray
    moments: Mapping[Word, np.ndarray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        phi_I = np.asarray(self.phi_I, dtype=complex)
        if phi_I.shape != (self.m, self.m):
            raise ConfigurationError(f"phi_I must be {self.m}x{self.m}, got {phi_I.shape}")
        scale = max(1.0, float(np.max(np.abs(phi_I), initial=0.0)))
        if np.max(np.abs(phi_I - phi_I.conj().T), initial=0.0) > 1e-10 * scale:
            raise NotHerglotzError("phi(I) must be Hermitian")
        moments = {tuple(w): np.asarray(v, dtype=complex) for w, v in self.moments.items()}
        object.__setattr__(self, "phi_I", phi_I)
        object.__setattr__(self, "moments", moments)

    @classmethod
    def delta(cls, d: int, m: int, N: int, phi_I: np.ndarray | None = None) -> MomentFunctional:
        """The functional of B = 0: φ(I) given (identity by default), all other moments zero."""
        base = np.eye(m, dtype=complex) if phi_I is None else phi_I
        zero = np.zeros((m, m), dtype=complex)
        return cls(d, m, N, base, {w: zero for w in enumerate_words(d, N)[1:]})

    def value(self, gamma: Word) -> np.ndarray:
        """φ(L^γ)."""
        if gamma == EMPTY:
            return self.phi_I
        try:
            return self.moments[gamma]
        except KeyError:
            raise ConfigurationError(
                f"Moment for word {''.join(map(str, gamma))!r} is not available"
            ) from None

    def evaluate(self, c: Cancellation) -> np.ndarray:
        """φ((L^α)* L^β) from the cancellation of α against β."""
        if c.kind == CancellationKind.RIGHT_REMAINDER:
            return self.value(c.remainder)
        if c.kind == CancellationKind.LEFT_REMAINDER:
            return self.value(c.remainder).conj().T
        return np.zeros((self.m, self.m), dtype=complex)

    def truncated(self, N: int) -> MomentFunctional:
        kept = {w: v for w, v in self.moments.items() if len(w) <= N}
        return MomentFunctional(self.d, self.m, N, self.phi_I, kept)

    def max_difference(self, other: MomentFunctional, max_len: int | None = None) -> float:
        top = min(self.N, other.N) if max_len is None else max_len
        err = float(np.max(np.abs(self.phi_I - other.phi_I)))
        for w in enumerate_words(self.d, top)[1:]:
            err = max(err, float(np.max(np.abs(self.value(w) - other.value(w)))))
        return err


# ============================================================================
# Cayley transforms
# ============================================================================


def check_nonunital(B: FreeSeries, margin: float = 1e-8) -> None:
    norm0 = float(np.linalg.norm(B.coeff(EMPTY), 2))
    if norm0 >= 1.0 - margin:
        raise NonUnitalViolationError(
            f"Constant coefficient has norm {norm0:.3g}; need < 1 - {margin:g}"
        )


def cayley_to_herglotz(
    B: FreeSeries, side: Side = Side.LEFT, margin: float = 1e-8
) -> FreeSeries:
    """H = (I − B)^{-1}(I + B) with the side's product."""
    check_nonunital(B, margin)
    ident = FreeSeries.identity(B.d, B.m, B.N)
    return series_multiply(invert_series(ident - B, side=side), ident + B, side)


def cayley_to_schur(
    H: FreeSeries, side: Side = Side.LEFT, cond_guard: float = 1e12
) -> FreeSeries:
    """B = (H + I)^{-1}(H − I)."""
    ident = FreeSeries.identity(H.d, H.m, H.N)
    try:
        inv = invert_series(H + ident, cond_guard, side)
    except NonUnitalViolationError as exc:
        raise NotHerglotzError("H_0 + I is singular") from exc
    return series_multiply(inv, H - ident, side)


# ============================================================================
# Herglotz representation
# ============================================================================


def moments_from_herglotz(
    H: FreeSeries, side: Side = Side.LEFT, tol: float = 1e-9
) -> MomentFunctional:
    h0 = H.coeff(EMPTY)
    phi_I = 0.5 * (h0 + h0.conj().T)
    eigs = np.linalg.eigvalsh(phi_I)
    if eigs[0] < -tol * max(1.0, float(np.max(np.abs(eigs)))):
        raise NotHerglotzError(f"Re H_0 is not positive semidefinite (min eig {eigs[0]:.3g})")
    moments: dict[Word, np.ndarray] = {}
    for gamma in enumerate_words(H.d, H.N)[1:]:
        source = transpose(gamma) if side == Side.LEFT else gamma
        moments[gamma] = 0.5 * H.coeff(source).conj().T
    return MomentFunctional(H.d, H.m, H.N, phi_I, moments)


def herglotz_from_moments(
    phi: MomentFunctional, side: Side = Side.LEFT, imag: np.ndarray | None = None
) -> FreeSeries:
    """H_∅ = φ(I) + imag, H_α = 2 φ(L^{α^T})* (left) or 2 φ(L^α)* (right).

    imag is the skew-Hermitian part i·Im H_∅ the functional cannot see; zero by default.
    """
    h0 = phi.phi_I.copy() if imag is None else phi.phi_I + np.asarray(imag, dtype=complex)
    coeffs: dict[Word, np.ndarray] = {EMPTY: h0}
    for alpha in enumerate_words(phi.d, phi.N)[1:]:
        source = transpose(alpha) if side == Side.LEFT else alpha
        coeffs[alpha] = 2.0 * phi.value(source).conj().T
    return FreeSeries(phi.d, phi.m, phi.N, coeffs)


def moments_from_schur(
    B: FreeSeries, side: Side = Side.LEFT, margin: float = 1e-8, tol: float = 1e-9
) -> MomentFunctional:
    """Aleksandrov-Clark functional μ_B up to word length N."""
    H = cayley_to_herglotz(B, side, margin)
    phi = moments_from_herglotz(H, side, tol)
    logger.debug(f"Computed AC moments for d={B.d}, m={B.m}, N={B.N}")
    return phi


def imaginary_constant(H: FreeSeries) -> np.ndarray:
    """The skew-Hermitian part ½(H_∅ − H_∅*) of a Herglotz series."""
    h0 = H.coeff(EMPTY)
    return 0.5 * (h0 - h0.conj().T)


def schur_pair_from_moments(
    phi: MomentFunctional, imag: np.ndarray | None = None
) -> tuple[FreeSeries, FreeSeries]:
    """Transpose-conjugate Schur pair (B^L, B^R) with AC functional φ."""
    left = cayley_to_schur(herglotz_from_moments(phi, Side.LEFT, imag), Side.LEFT)
    return left, transpose_series(left)
