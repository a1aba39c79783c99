"""
de Branges-Rovnyak spaces, Gleason solutions and the free Clark intertwining.

Every function takes the series that belongs to the requested side: the right
space H^R(B) is built from B^R and the left space from B^L = T(B^R). Elements
of a dB-R space are stored as Fock coefficient vectors in ran D, where
D = I − M_B M_B*; ON coordinates are c = Λ^{-1/2} V* f for D = V Λ V*.

Truncated identities are exact on coefficient rows of degree ≤ N − 1; the
reports restrict to degree ≤ N − deg(B) − 1 and record that bound.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from loguru import logger

from .errors import ConfigurationError, DimensionMismatchError, NotContractionError
from .freecore import EMPTY, Side, TruncatedFock, creation_matrix, transposition_unitary
from .gns import RANK_TOL, GnsSpace, build_gns, factor_gram
from .herglotz_ac import (
    MomentFunctional,
    cayley_to_herglotz,
    check_nonunital,
    moments_from_schur,
)
from .kernels import PSD_TOL, dbr_kernel, herglotz_kernel_from_H, psd_check
from .series import FreeSeries, mult_matrix, series_columns, series_multiply, transpose_series

LEAK_TOL = 1e-8
UNITARY_TOL = 1e-12


def _other(side: Side) -> Side:
    return Side.LEFT if side == Side.RIGHT else Side.RIGHT


def _safe_degree(B: FreeSeries) -> int:
    return max(B.N - B.degree - 1, 0)


def _safe_rows(fock: TruncatedFock, degree: int) -> np.ndarray:
    return np.flatnonzero(fock.word_degrees() <= degree)


def backward_shift(fock: TruncatedFock, side: Side, j: int) -> np.ndarray:
    """The adjoint shift that leaves the side's dB-R space invariant.

    L_j* (drop a leading j) for the right space, R_j* (drop a trailing j) for the left.
    """
    return creation_matrix(fock, _other(side), j).toarray().conj().T


# ============================================================================
# dB-R space
# ============================================================================


@dataclass(frozen=True, eq=False)
class DbrSpace:
    B: FreeSeries
    side: Side
    fock: TruncatedFock
    D: np.ndarray
    eigenvalues: np.ndarray
    vecs: np.ndarray
    warnings: tuple[str, ...] = ()

    @property
    def rank(self) -> int:
        return int(self.eigenvalues.size)

    @property
    def kernel_coords(self) -> np.ndarray:
        """ON coordinates of every kernel column k̂_α e_i, i.e. Λ^{1/2} V*."""
        return np.sqrt(self.eigenvalues)[:, None] * self.vecs.conj().T

    @property
    def basis(self) -> np.ndarray:
        """Fock coefficient vectors of the ON basis, V Λ^{1/2}."""
        return self.vecs * np.sqrt(self.eigenvalues)[None, :]

    @property
    def projector(self) -> np.ndarray:
        return self.vecs @ self.vecs.conj().T

    def kernel(self, alpha: tuple[int, ...]) -> np.ndarray:
        """k̂_α as a dim×m block of Fock coefficient columns."""
        return self.D[:, self.fock.block(alpha)]

    def coordinates(self, f: np.ndarray) -> np.ndarray:
        return (self.vecs.conj().T @ f) / np.sqrt(self.eigenvalues)[:, None]

    def vectors(self, c: np.ndarray) -> np.ndarray:
        return self.basis @ c

    def inner(self, f: np.ndarray, g: np.ndarray) -> np.ndarray:
        """⟨g, f⟩ matrix f* D⁺ g for f, g in ran D."""
        return self.coordinates(f).conj().T @ self.coordinates(g)

    def range_residual(self, f: np.ndarray) -> float:
        if f.size == 0:
            return 0.0
        return float(np.max(np.abs(f - self.projector @ f), initial=0.0))


def dbr_space(
    B: FreeSeries,
    side: Side = Side.RIGHT,
    psd_tol: float = PSD_TOL,
    rank_tol: float = RANK_TOL,
) -> DbrSpace:
    kernel = dbr_kernel(B, side)
    report = psd_check(kernel.matrix, psd_tol)
    if not report.passed:
        raise NotContractionError(
            f"I - M_B M_B* has min eigenvalue {report.min_eig:.3g}; B is not a contraction"
        )
    eigs, X = factor_gram(kernel.matrix, rank_tol)
    vecs = X.conj().T / np.sqrt(eigs)[None, :] if eigs.size else X.conj().T
    logger.debug(f"dB-R space ({side}): raw dim {kernel.fock.dim}, rank {eigs.size}")
    return DbrSpace(
        B=B,
        side=side,
        fock=kernel.fock,
        D=kernel.matrix,
        eigenvalues=eigs,
        vecs=vecs,
        warnings=kernel.warnings,
    )


# ============================================================================
# Gleason solutions
# ============================================================================


@dataclass(frozen=True, eq=False)
class GleasonSolution:
    """B̂ = (B̂_1, …, B̂_d) with B(Z) − B_∅ = Σ_j Z_j B̂_j(Z).

    That is the right form; the left form is B(Z) − B_∅ = Σ_j B̂_j(Z) Z_j.
    """

    B: FreeSeries
    side: Side
    components: tuple[FreeSeries, ...]

    def columns(self, fock: TruncatedFock) -> tuple[np.ndarray, ...]:
        return tuple(series_columns(c, fock) for c in self.components)

    def identity_error(self) -> float:
        total = FreeSeries.zero(self.B.d, self.B.m, self.B.N)
        for j, comp in enumerate(self.components, start=1):
            letter = FreeSeries(self.B.d, self.B.m, self.B.N, {(j,): np.eye(self.B.m)})
            if self.side == Side.RIGHT:
                total = total + series_multiply(letter, comp, Side.LEFT)
            else:
                total = total + series_multiply(comp, letter, Side.LEFT)
        target = self.B - FreeSeries.constant(self.B.d, self.B.m, self.B.N, self.B.coeff(EMPTY))
        return total.max_difference(target)

    def contractivity_excess(self, space: DbrSpace) -> float:
        """Largest eigenvalue of B̂*B̂ − (I − B_∅*B_∅); ≤ 0 when contractive."""
        b0 = self.B.coeff(EMPTY)
        gram = sum(space.inner(c, c) for c in self.columns(space.fock))
        excess = gram - (np.eye(self.B.m) - b0.conj().T @ b0)
        return float(np.linalg.eigvalsh(0.5 * (excess + excess.conj().T))[-1])


def gleason_B(B: FreeSeries, side: Side = Side.RIGHT) -> GleasonSolution:
    """The unique contractive Gleason solution: (B̂_j)_α = B_{jα} (right) or B_{αj} (left)."""
    comps = []
    for j in range(1, B.d + 1):
        coeffs = {}
        for w, c in B.coeffs.items():
            if side == Side.RIGHT and w[:1] == (j,):
                coeffs[w[1:]] = c
            elif side == Side.LEFT and w[-1:] == (j,):
                coeffs[w[:-1]] = c
        comps.append(FreeSeries(B.d, B.m, B.N, coeffs))
    return GleasonSolution(B=B, side=side, components=tuple(comps))


def gleason_constraint_solution(
    B: FreeSeries, side: Side = Side.RIGHT
) -> tuple[GleasonSolution, int]:
    """Least-squares solution of the kernel identities for B̂ and their nullity.

    The equations are B̂_j B_β* = (D S_j − S_j D)_{·β} on coefficient rows of degree
    ≤ N − 1, with D the side's dB-R kernel and S_j its backward shift. Unknowns are the
    coefficients of degree ≤ N − 1 of each component; the nullity counts the directions
    the equations leave free, zero exactly when the coefficients B_β span C^m.
    """
    if B.N == 0:
        return gleason_B(B, side), 0
    fock = TruncatedFock(B.d, B.m, B.N)
    D = dbr_kernel(B, side).matrix
    b_adj = series_columns(B, fock).conj().T
    rows = _safe_rows(fock, B.N - 1)
    free_per_row = int(sla.null_space(b_adj.T).shape[1])
    comps = []
    for j in range(1, B.d + 1):
        S = backward_shift(fock, side, j)
        target = (D @ S - S @ D)[rows]
        solution, *_ = sla.lstsq(b_adj.T, target.T)
        full = np.zeros((fock.dim, B.m), dtype=complex)
        full[rows] = solution.T
        coeffs = {w: full[fock.block(w)] for w in fock.words if len(w) <= B.N - 1}
        comps.append(FreeSeries(B.d, B.m, B.N, coeffs))
    nullity = B.d * rows.size * free_per_row
    return GleasonSolution(B=B, side=side, components=tuple(comps)), nullity


def gleason_X(space: DbrSpace, gleason: GleasonSolution | None = None) -> tuple[np.ndarray, ...]:
    """(X̂_1*, …, X̂_d*) in ON coordinates, from X* k̂_β = S_j k̂_β − B̂_j B_β*.

    The kernel identity gives X* on kernel columns at every coefficient row, so the
    result is the compression of X* to the truncated space and stays a row contraction.
    """
    fock = space.fock
    gleason = gleason or gleason_B(space.B, space.side)
    b_adj = series_columns(space.B, fock).conj().T
    to_kernels = space.vecs / np.sqrt(space.eigenvalues)[None, :]
    return tuple(
        space.coordinates(space.D @ backward_shift(fock, space.side, j) - bhat @ b_adj)
        @ to_kernels
        for j, bhat in enumerate(gleason.columns(fock), start=1)
    )


def row_contraction_excess(x_adjoints: tuple[np.ndarray, ...]) -> float:
    """Largest eigenvalue of Σ_j X̂_j X̂_j* − I."""
    if not x_adjoints or x_adjoints[0].size == 0:
        return 0.0
    total = sum(x.conj().T @ x for x in x_adjoints)
    total = total - np.eye(total.shape[0])
    return float(np.linalg.eigvalsh(0.5 * (total + total.conj().T))[-1])


def kernel_identity_error(
    B: FreeSeries, side: Side = Side.RIGHT, gleason: GleasonSolution | None = None
) -> float:
    """Coefficient check of X̂* k̂_β = k̂_{β'} − B̂ B_β* by convolution on the safe rows.

    gleason defaults to the canonical solution of B.
    """
    fock = TruncatedFock(B.d, B.m, B.N)
    D = dbr_kernel(B, side).matrix
    b_adj = series_columns(B, fock).conj().T
    rows = _safe_rows(fock, _safe_degree(B))
    gleason = gleason or gleason_B(B, side)
    err = 0.0
    for j, bhat in enumerate(gleason.columns(fock), start=1):
        S = backward_shift(fock, side, j)
        residual = S @ D - D @ S + bhat @ b_adj
        err = max(err, float(np.max(np.abs(residual[rows]), initial=0.0)))
    return err


def perturbation_coisometry_defect(
    B: FreeSeries, side: Side = Side.RIGHT, gleason: GleasonSolution | None = None
) -> float:
    """max_{j,k} of T_j* T_k k̂_β − δ_jk k̂_β on the safe rows.

    T* = X* + B̂(I − B_∅)^{-1}k̂_∅* is the perturbed backward shift. P_N T_k k̂_β
    is read off ⟨T_k k̂_β, k̂_γ⟩ = ⟨k̂_β, T_k* k̂_γ⟩. T_j* f on rows of degree
    ≤ N − 1 needs only P_N f, so both sides are exact there.
    """
    fock = TruncatedFock(B.d, B.m, B.N)
    D = dbr_kernel(B, side).matrix
    b_adj = series_columns(B, fock).conj().T
    rows = _safe_rows(fock, _safe_degree(B))
    resolvent = np.linalg.inv(np.eye(B.m) - B.coeff(EMPTY))
    unit_row = np.zeros((B.m, fock.dim), dtype=complex)
    unit_row[:, fock.block(EMPTY)] = np.eye(B.m)
    gleason = gleason or gleason_B(B, side)
    shifts = [backward_shift(fock, side, j) for j in range(1, B.d + 1)]
    bhats = gleason.columns(fock)
    # columns of T_k* on the kernels, and T_j* on an arbitrary coefficient vector
    on_kernels = [
        D @ S + bhat @ resolvent @ (unit_row - b_adj) for S, bhat in zip(shifts, bhats, strict=True)
    ]
    on_vectors = [S + bhat @ resolvent @ unit_row for S, bhat in zip(shifts, bhats, strict=True)]
    err = 0.0
    for j, Tj_adj in enumerate(on_vectors):
        for k, Tk_adj in enumerate(on_kernels):
            product = Tj_adj @ Tk_adj.conj().T
            if j == k:
                product = product - D
            err = max(err, float(np.max(np.abs(product[rows]), initial=0.0)))
    return err


# ============================================================================
# Cauchy transforms
# ============================================================================


def cauchy_transform(g: GnsSpace, B: FreeSeries | None = None) -> np.ndarray:
    """GNS ON coordinates → right Herglotz-space coefficient vectors.

    The raw vector π(L)^α[I⊗]e_i goes to the kernel column (K̂^R_{β,α} e_i)_β.
    """
    if B is not None and (B.d, B.m, B.N) != (g.fock.d, g.fock.m, g.fock.N):
        raise DimensionMismatchError("Series and GNS space have different (d, m, N)")
    return g.coords.conj().T


def cauchy_transform_left(g: GnsSpace, B: FreeSeries | None = None) -> np.ndarray:
    """Left Cauchy transform: coefficient transposition of the right one."""
    return transposition_unitary(g.fock) @ cauchy_transform(g, B)


def cauchy_isometry_defect(B: FreeSeries, C: np.ndarray, rank_tol: float = RANK_TOL) -> float:
    """‖C* K̂⁺ C − I‖ in the right Herglotz space of B, the right member of the pair.

    K̂ comes from the Cayley transform H^R of B, not from the moments behind C.
    """
    if C.shape[1] == 0:
        return 0.0
    K = herglotz_kernel_from_H(cayley_to_herglotz(B, Side.RIGHT), Side.RIGHT).matrix
    if C.shape[0] != K.shape[0]:
        raise DimensionMismatchError("Cauchy image and Herglotz space have different dimensions")
    pinv = sla.pinvh(0.5 * (K + K.conj().T), rtol=rank_tol)
    return float(np.linalg.norm(C.conj().T @ pinv @ C - np.eye(C.shape[1]), 2))


def _weighted(g: GnsSpace, B: FreeSeries, side: Side, space: DbrSpace | None) -> np.ndarray:
    space = space or dbr_space(B, side)
    ident = FreeSeries.identity(B.d, B.m, B.N)
    raw = mult_matrix(ident - B, side, g.fock)
    if side == Side.RIGHT:
        raw = raw @ cauchy_transform(g, B)
    else:
        raw = raw @ cauchy_transform_left(g, B)
    leak = space.range_residual(raw)
    if leak > LEAK_TOL * max(1.0, float(np.max(np.abs(raw), initial=0.0))):
        logger.warning(f"Weighted Cauchy image leaves ran D by {leak:.3g} (truncation leak)")
    return space.coordinates(raw)


def weighted_cauchy(g: GnsSpace, B: FreeSeries, space: DbrSpace | None = None) -> np.ndarray:
    """F̂_R = (I − B^R)•_R Ĉ_R from GNS ON coordinates to H^R(B) ON coordinates.

    Raw vectors of degree ≤ k land in the span of k̂_γ with |γ| ≤ k, so the map is unitary
    on the whole truncation.
    """
    return _weighted(g, B, Side.RIGHT, space)


def weighted_cauchy_left(
    g: GnsSpace, B: FreeSeries, space: DbrSpace | None = None
) -> np.ndarray:
    """F̂_L = (I − B^L) Ĉ_L into H^L(B); B here is the left member B^L."""
    return _weighted(g, B, Side.LEFT, space)


def unitary_defect(F: np.ndarray) -> float:
    if F.size == 0:
        return 0.0
    left = np.linalg.norm(F.conj().T @ F - np.eye(F.shape[1]), 2)
    right = np.linalg.norm(F @ F.conj().T - np.eye(F.shape[0]), 2)
    return float(max(left, right))


def transposition_W(
    B: FreeSeries, g: GnsSpace | None = None
) -> tuple[np.ndarray, DbrSpace, DbrSpace]:
    """W_T = F̂_L F̂_R*: H^R(B) → H^L(B), returned with the right and left spaces.

    B is the right member; the left space is built from its transpose.
    """
    g = g or build_gns(moments_from_schur(B, Side.RIGHT))
    right = dbr_space(B, Side.RIGHT)
    left = dbr_space(transpose_series(B), Side.LEFT)
    F_R = weighted_cauchy(g, B, right)
    F_L = weighted_cauchy_left(g, transpose_series(B), left)
    return F_L @ F_R.conj().T, right, left


def transposition_error(W: np.ndarray, right: DbrSpace, left: DbrSpace) -> float:
    """Max coefficient difference between W acting on H^R(B) and word transposition."""
    U = transposition_unitary(right.fock)
    return float(
        np.max(np.abs(left.vectors(W) - U @ right.basis), initial=0.0)
    )


# ============================================================================
# Clark intertwining
# ============================================================================


@dataclass(frozen=True)
class ClarkReport:
    side: Side
    safe_degree: int
    lhs_rhs_error: float
    kernel_identity_error: float
    kernel_action_error: float
    gleason_error: float
    gleason_excess: float
    weighted_isometry_defect: float
    coisometry_defect: float
    cauchy_isometry_defect: float = 0.0
    transposition_error: float = 0.0
    warnings: tuple[str, ...] = field(default_factory=tuple)

    @property
    def max_error(self) -> float:
        return max(
            self.lhs_rhs_error,
            self.kernel_identity_error,
            self.kernel_action_error,
            self.gleason_error,
            self.weighted_isometry_defect,
            self.coisometry_defect,
            self.transposition_error,
        )

    def passed(self, tol: float = 1e-7) -> bool:
        return self.max_error < tol and self.gleason_excess <= tol


@dataclass(frozen=True, eq=False)
class ClarkOperators:
    """Both sides of F̂ π(L)* F̂* = X̂* + B̂(I − B_∅)^{-1} k̂_∅* in ON coordinates."""

    space: DbrSpace
    gns: GnsSpace
    weighted: np.ndarray
    gleason: GleasonSolution
    lhs: tuple[np.ndarray, ...]
    rhs: tuple[np.ndarray, ...]


def clark_operators(
    B: FreeSeries,
    side: Side = Side.RIGHT,
    g: GnsSpace | None = None,
    space: DbrSpace | None = None,
) -> ClarkOperators:
    check_nonunital(B)
    g = g or build_gns(moments_from_schur(B, side))
    space = space or dbr_space(B, side)
    F = _weighted(g, B, side, space)
    gleason = gleason_B(B, side)
    bhat_coords = [space.coordinates(c) for c in gleason.columns(space.fock)]
    resolvent = np.linalg.inv(np.eye(B.m) - B.coeff(EMPTY))
    k0_adj = space.kernel_coords[:, space.fock.block(EMPTY)].conj().T
    lhs = tuple(F @ p.conj().T @ F.conj().T for p in g.piL)
    rhs = tuple(
        x + b @ resolvent @ k0_adj
        for x, b in zip(gleason_X(space, gleason), bhat_coords, strict=True)
    )
    return ClarkOperators(space=space, gns=g, weighted=F, gleason=gleason, lhs=lhs, rhs=rhs)


def _kernel_action_error(ops: ClarkOperators, safe: int) -> float:
    """F̂ π_j* F̂* k̂_β against k̂_{β'} + B̂_j(I − B_∅)^{-1}(δ_{β∅}I − B_β*)."""
    space, B = ops.space, ops.space.B
    fock = space.fock
    rows = _safe_rows(fock, safe)
    resolvent = np.linalg.inv(np.eye(B.m) - B.coeff(EMPTY))
    unit_row = np.zeros((B.m, fock.dim), dtype=complex)
    unit_row[:, fock.block(EMPTY)] = np.eye(B.m)
    b_adj = series_columns(B, fock).conj().T
    err = 0.0
    for j, (lhs, bhat) in enumerate(
        zip(ops.lhs, ops.gleason.columns(fock), strict=True), start=1
    ):
        applied = space.vectors(lhs @ space.kernel_coords)
        expected = space.D @ backward_shift(fock, space.side, j) + bhat @ resolvent @ (
            unit_row - b_adj
        )
        err = max(err, float(np.max(np.abs((applied - expected)[rows]), initial=0.0)))
    return err


def verify_clark(
    B: FreeSeries,
    side: Side = Side.RIGHT,
    phi: MomentFunctional | None = None,
) -> ClarkReport:
    """Check the free Clark intertwining for B, the side's member of the Schur pair.

    The left identity is also compared with the W_T conjugate of the right one.
    """
    check_nonunital(B)
    phi = phi or moments_from_schur(B, side)
    g = build_gns(phi)
    ops = clark_operators(B, side, g)
    fock, space = ops.space.fock, ops.space
    safe = _safe_degree(B)
    rows = _safe_rows(fock, safe)

    lhs_rhs = 0.0
    for lhs, rhs in zip(ops.lhs, ops.rhs, strict=True):
        diff = space.vectors(lhs - rhs)
        lhs_rhs = max(lhs_rhs, float(np.max(np.abs(diff[rows]), initial=0.0)))

    B_right = B if side == Side.RIGHT else transpose_series(B)
    transposition = 0.0
    if side == Side.LEFT:
        W, right, left = transposition_W(B_right, g)
        right_ops = clark_operators(B_right, Side.RIGHT, g, right)
        transposition = transposition_error(W, right, left)
        for lhs_r, lhs_l in zip(right_ops.lhs, ops.lhs, strict=True):
            conj = left.vectors(W @ lhs_r @ W.conj().T - lhs_l)
            transposition = max(transposition, float(np.max(np.abs(conj[rows]), initial=0.0)))

    report = ClarkReport(
        side=side,
        safe_degree=safe,
        lhs_rhs_error=lhs_rhs,
        kernel_identity_error=kernel_identity_error(B, side),
        kernel_action_error=_kernel_action_error(ops, safe),
        gleason_error=ops.gleason.identity_error(),
        gleason_excess=max(
            ops.gleason.contractivity_excess(space),
            row_contraction_excess(gleason_X(space, ops.gleason)),
        ),
        weighted_isometry_defect=unitary_defect(ops.weighted),
        coisometry_defect=perturbation_coisometry_defect(B, side, ops.gleason),
        cauchy_isometry_defect=cauchy_isometry_defect(B_right, cauchy_transform(g, B)),
        transposition_error=transposition,
        warnings=space.warnings,
    )
    logger.debug(f"Clark check ({side}): max error {report.max_error:.3g}")
    return report


@dataclass(frozen=True)
class ClarkFamilyReport:
    rotated: FreeSeries
    dbr_difference: float
    clark: ClarkReport


def clark_family(B: FreeSeries, U: np.ndarray, side: Side = Side.RIGHT) -> ClarkFamilyReport:
    """Run the intertwining check on BU*, whose dB-R space equals that of B."""
    U = np.asarray(U, dtype=complex)
    if U.shape != (B.m, B.m):
        raise DimensionMismatchError(f"U must be {B.m}x{B.m}, got {U.shape}")
    if np.max(np.abs(U.conj().T @ U - np.eye(B.m))) > UNITARY_TOL:
        raise ConfigurationError("U is not unitary")
    rotated = B.right_apply(U.conj().T)
    diff = float(np.max(np.abs(dbr_kernel(rotated, side).matrix - dbr_kernel(B, side).matrix)))
    return ClarkFamilyReport(
        rotated=rotated, dbr_difference=diff, clark=verify_clark(rotated, side)
    )
