"""
GNS construction of the free Hardy space F²(μ).

The raw spanning vectors are L^α ⊗ e_i for |α| ≤ N with Gram
⟨L^α⊗e_i, L^β⊗e_j⟩ = φ((L^α)* L^β)_{ij}. ON coordinates come from the
eigendecomposition of that Gram: the raw vector (α, i) has coordinates
``coords[:, fock.basis_index(α, i)]`` in an orthonormal basis of the quotient.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from loguru import logger

from .errors import NotCompletelyPositiveError
from .freecore import Side, TruncatedFock, creation_matrix
from .herglotz_ac import MomentFunctional
from .kernels import herglotz_kernel_from_moments, psd_check

RANK_TOL = 1e-10


def orthonormal_columns(A: np.ndarray, rank_tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal basis of ran A, dropping directions below √rank_tol relative size."""
    if A.size == 0 or not np.any(A):
        return np.zeros((A.shape[0], 0), dtype=complex)
    return sla.orth(A, rcond=np.sqrt(rank_tol))


def factor_gram(G: np.ndarray, rank_tol: float = RANK_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues kept and X = Λ^{1/2} V* with X* X ≈ G."""
    eigs, vecs = np.linalg.eigh(0.5 * (G + G.conj().T))
    top = float(eigs[-1]) if eigs.size else 0.0
    keep = eigs > rank_tol * max(top, 0.0)
    if top <= 0.0:
        keep[:] = False
    kept = eigs[keep][::-1]
    V = vecs[:, keep][:, ::-1]
    return kept, np.sqrt(kept)[:, None] * V.conj().T


@dataclass(frozen=True, eq=False)
class GnsSpace:
    phi: MomentFunctional
    fock: TruncatedFock
    gram: np.ndarray
    eigenvalues: np.ndarray
    coords: np.ndarray
    piL: tuple[np.ndarray, ...]
    embed: np.ndarray
    safe_basis: np.ndarray

    @property
    def rank(self) -> int:
        return int(self.coords.shape[0])

    def word_power(self, alpha: tuple[int, ...]) -> np.ndarray:
        """π(L)^α = π(L_{i_1})···π(L_{i_k})."""
        out = np.eye(self.rank, dtype=complex)
        for letter in alpha:
            out = out @ self.piL[letter - 1]
        return out


def build_gns(
    phi: MomentFunctional, rank_tol: float = RANK_TOL, psd_tol: float = 1e-9
) -> GnsSpace:
    fock = TruncatedFock(phi.d, phi.m, phi.N)
    G = herglotz_kernel_from_moments(phi, Side.RIGHT).matrix
    report = psd_check(G, psd_tol)
    if not report.passed:
        raise NotCompletelyPositiveError(
            f"Moment Gram has min eigenvalue {report.min_eig:.3g}; "
            f"functional is not completely positive at level N={phi.N}"
        )
    eigs, X = factor_gram(G, rank_tol)

    # π(L_j) is defined on the span of raw vectors of degree < N
    degrees = fock.word_degrees()
    lower = np.flatnonzero(degrees < fock.N)
    X_lower = X[:, lower]
    X_lower_pinv = sla.pinv(X_lower, rtol=np.sqrt(rank_tol)) if X_lower.size else X_lower.T
    piL = tuple(
        X @ creation_matrix(fock, Side.LEFT, j)[:, lower].toarray() @ X_lower_pinv
        for j in range(1, fock.d + 1)
    )
    embed = X[:, fock.block(())]
    safe_basis = orthonormal_columns(X_lower, rank_tol)
    logger.debug(
        f"GNS space: raw dim {fock.dim}, rank {X.shape[0]}, safe rank {safe_basis.shape[1]}"
    )
    return GnsSpace(
        phi=phi,
        fock=fock,
        gram=G,
        eigenvalues=eigs,
        coords=X,
        piL=piL,
        embed=embed,
        safe_basis=safe_basis,
    )


def stinespring_check(g: GnsSpace) -> float:
    """max_{|α| ≤ N−1} ‖φ(L^α) − [I⊗]* π(L)^α [I⊗]‖."""
    err = 0.0
    for alpha in g.fock.words:
        if len(alpha) >= g.fock.N and g.fock.N > 0:
            break
        dilated = g.embed.conj().T @ g.word_power(alpha) @ g.embed
        err = max(err, float(np.max(np.abs(g.phi.value(alpha) - dilated))))
    return err


@dataclass(frozen=True)
class RowIsometryDefect:
    isometry_defect: float
    cuntz_defect: float


def row_isometry_defect(g: GnsSpace) -> RowIsometryDefect:
    Q = g.safe_basis
    if Q.shape[1] == 0:
        return RowIsometryDefect(0.0, 0.0)
    iso = 0.0
    for i, Pi in enumerate(g.piL):
        for j, Pj in enumerate(g.piL):
            target = np.eye(Q.shape[1]) if i == j else 0.0
            iso = max(iso, float(np.linalg.norm(Q.conj().T @ Pi.conj().T @ Pj @ Q - target, 2)))
    row_range = sum(P @ P.conj().T for P in g.piL)
    cuntz = float(np.linalg.norm(Q.conj().T @ (np.eye(g.rank) - row_range) @ Q, 2))
    return RowIsometryDefect(isometry_defect=iso, cuntz_defect=cuntz)


def quasi_extreme_indicator(
    phi: MomentFunctional, g: GnsSpace | None = None, rank_tol: float = RANK_TOL
) -> float:
    """Relative squared distance from [I⊗]H to span{L^α⊗H : 1 ≤ |α| ≤ N}.

    The largest ‖(I − Q)[I⊗]h‖² / ‖[I⊗]h‖² over h, i.e. the top generalized
    eigenvalue against φ(I). It lies in [0, 1], equals 1 for the functional of B = 0
    and 0 for b(z) = z, and does not increase with N.
    """
    g = g or build_gns(phi, rank_tol)
    nonconstant = np.flatnonzero(g.fock.word_degrees() >= 1)
    Q = orthonormal_columns(g.coords[:, nonconstant], rank_tol)
    residual = g.embed - Q @ (Q.conj().T @ g.embed)
    phi_I = g.phi.phi_I
    weights, basis = np.linalg.eigh(0.5 * (phi_I + phi_I.conj().T))
    keep = weights > rank_tol * max(float(np.max(weights, initial=0.0)), 1.0)
    if not np.any(keep):
        return 0.0
    scaled = residual @ (basis[:, keep] / np.sqrt(weights[keep])[None, :])
    top = float(np.linalg.eigvalsh(scaled.conj().T @ scaled)[-1])
    return min(max(top, 0.0), 1.0)
