"""
Free coefficient kernels.

A kernel is stored densely as its Gram matrix over (word, slot) pairs in the
basis order of the truncated Fock space; entry(α, β) is the m×m block K_{α,β}.
Series passed with a side are that side's member of the Schur or Herglotz pair.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from loguru import logger

from .errors import DimensionMismatchError
from .freecore import EMPTY, Side, TruncatedFock, Word, cancel, transpose
from .herglotz_ac import MomentFunctional
from .series import FreeSeries, mult_matrix, schur_norm_bounds

PSD_TOL = 1e-9
HERMITIAN_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class CoeffKernel:
    fock: TruncatedFock
    matrix: np.ndarray
    warnings: tuple[str, ...] = ()

    def entry(self, alpha: Word, beta: Word) -> np.ndarray:
        return self.matrix[self.fock.block(alpha), self.fock.block(beta)]


@dataclass(frozen=True)
class PsdReport:
    min_eig: float
    norm: float
    passed: bool
    tolerance: float


def _kernel_from_entries(fock: TruncatedFock, entry) -> np.ndarray:  # type: ignore[no-untyped-def]
    G = np.zeros((fock.dim, fock.dim), dtype=complex)
    for a in fock.words:
        rows = fock.block(a)
        for b in fock.words:
            value = entry(a, b)
            if value is not None:
                G[rows, fock.block(b)] = value
    return G


def szego_kernel(d: int, m: int, N: int) -> CoeffKernel:
    fock = TruncatedFock(d, m, N)
    return CoeffKernel(fock, np.eye(fock.dim, dtype=complex))


def dbr_kernel(B: FreeSeries, side: Side = Side.RIGHT) -> CoeffKernel:
    """δ_{αβ}I − Σ B_μ B_ν* over common prefixes (right) or suffixes (left) γ.

    Right: α = γμ, β = γν. Left: α = μγ, β = νγ.
    """
    fock = TruncatedFock(B.d, B.m, B.N)
    ident = np.eye(B.m, dtype=complex)

    def entry(a: Word, b: Word) -> np.ndarray:
        if side == Side.LEFT:
            a, b = transpose(a), transpose(b)
        acc = ident.copy() if a == b else np.zeros_like(ident)
        for k in range(min(len(a), len(b)) + 1):
            if a[:k] != b[:k]:
                break
            mu, nu = a[k:], b[k:]
            if side == Side.LEFT:
                mu, nu = transpose(mu), transpose(nu)
            bm, bn = B.coeffs.get(mu), B.coeffs.get(nu)
            if bm is not None and bn is not None:
                acc -= bm @ bn.conj().T
        return acc

    warnings: tuple[str, ...] = ()
    bounds = schur_norm_bounds(B, fock)
    if bounds.upper > 1.0 and bounds.lower > 1.0:
        logger.warning(f"dB-R kernel of a non-Schur series (norm ≥ {bounds.lower:.4f})")
        warnings = ("non_schur",)
    elif not bounds.certified_contractive:
        warnings = ("compressed_bound_only",)
    return CoeffKernel(fock, _kernel_from_entries(fock, entry), warnings)


def herglotz_kernel_from_moments(phi: MomentFunctional, side: Side = Side.LEFT) -> CoeffKernel:
    """K^R_{α,β} = φ((L^α)* L^β); the left kernel cancels the transposed words."""
    fock = TruncatedFock(phi.d, phi.m, phi.N)

    def entry(a: Word, b: Word) -> np.ndarray:
        if side == Side.LEFT:
            a, b = transpose(a), transpose(b)
        return phi.evaluate(cancel(a, b))

    return CoeffKernel(fock, _kernel_from_entries(fock, entry))


def herglotz_kernel_from_H(H: FreeSeries, side: Side = Side.LEFT) -> CoeffKernel:
    """½(Σ_{γβ=α} H_γ + Σ_{γα=β} H_γ*) for the left member; the right swaps prefixes."""
    fock = TruncatedFock(H.d, H.m, H.N)

    def entry(a: Word, b: Word) -> np.ndarray:
        if a == b:
            h0 = H.coeff(EMPTY)
            return 0.5 * (h0 + h0.conj().T)
        if side == Side.LEFT:
            if len(a) > len(b) and a[len(a) - len(b) :] == b:
                return 0.5 * H.coeff(a[: len(a) - len(b)])
            if len(b) > len(a) and b[len(b) - len(a) :] == a:
                return 0.5 * H.coeff(b[: len(b) - len(a)]).conj().T
        else:
            if len(a) > len(b) and a[: len(b)] == b:
                return 0.5 * H.coeff(a[len(b) :])
            if len(b) > len(a) and b[: len(a)] == a:
                return 0.5 * H.coeff(b[len(a) :]).conj().T
        return np.zeros((H.m, H.m), dtype=complex)

    return CoeffKernel(fock, _kernel_from_entries(fock, entry))


def gram(kernel: CoeffKernel) -> np.ndarray:
    return kernel.matrix.copy()


def psd_check(G: np.ndarray, tol: float = PSD_TOL) -> PsdReport:
    """Level-N positivity certificate: min eig ≥ −tol·max(1, ‖G‖)."""
    G = np.asarray(G, dtype=complex)
    if G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise DimensionMismatchError(f"Gram matrix must be square, got shape {G.shape}")
    if G.size == 0:
        return PsdReport(min_eig=0.0, norm=0.0, passed=True, tolerance=tol)
    scale = max(1.0, float(np.max(np.abs(G))))
    if np.max(np.abs(G - G.conj().T)) > HERMITIAN_TOL * scale:
        raise DimensionMismatchError("Gram matrix is not Hermitian")
    eigs = np.linalg.eigvalsh(0.5 * (G + G.conj().T))
    norm = float(np.max(np.abs(eigs)))
    min_eig = float(eigs[0])
    return PsdReport(
        min_eig=min_eig, norm=norm, passed=min_eig >= -tol * max(1.0, norm), tolerance=tol
    )


# ============================================================================
# Kernel transformations
# ============================================================================


def conjugate_kernel(F: FreeSeries, kernel: CoeffKernel, side: Side = Side.LEFT) -> CoeffKernel:
    """The kernel F(Z) K(Z,W) F(W)* as the Gram M_F G M_F*."""
    M = mult_matrix(F, side, kernel.fock)
    return CoeffKernel(kernel.fock, M @ kernel.matrix @ M.conj().T)


def multiplier_domination(
    B: FreeSeries,
    side: Side = Side.LEFT,
    kernel: CoeffKernel | None = None,
    tol: float = PSD_TOL,
) -> PsdReport:
    """PSD report of K − B K B* by double convolution on the degree ≤ N − deg(B) block."""
    kernel = kernel or szego_kernel(B.d, B.m, B.N)
    fock = kernel.fock
    safe = fock.N - B.degree
    words = [w for w in fock.words if len(w) <= safe]

    def split(w: Word) -> list[tuple[Word, Word]]:
        # (multiplier word, kernel word) pairs with w = μα (left) or w = αμ (right)
        out = []
        for k in range(len(w) + 1):
            mu, rest = (w[:k], w[k:]) if side == Side.LEFT else (w[len(w) - k :], w[: len(w) - k])
            if mu in B.coeffs:
                out.append((mu, rest))
        return out

    m = B.m
    G = np.zeros((len(words) * m, len(words) * m), dtype=complex)
    for i, g in enumerate(words):
        for j, h in enumerate(words):
            acc = kernel.entry(g, h).copy()
            for mu, a in split(g):
                for nu, b in split(h):
                    acc -= B.coeffs[mu] @ kernel.entry(a, b) @ B.coeffs[nu].conj().T
            G[i * m : (i + 1) * m, j * m : (j + 1) * m] = acc
    return psd_check(G, tol)
