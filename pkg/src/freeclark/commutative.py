"""
Drury-Arveson side: commutative Schur, Herglotz and moment data.

Commutative series are indexed by multi-indices in the order of
``enumerate_multi_indices``. The Herglotz space H²(μ_b) is spanned by the
symmetric vectors K̃_n = Σ_{λ(α)=n} L^α ⊗ [I⊗]; the dB-R space H(b) is stored
in monomial coefficients with kernel Gram

    D_{n,k} = δ_{nk} (|n|!/n!) I − Σ_{p ≤ n, k} (|p|!/p!) b_{n−p} b_{k−p}*,

so the restriction of a free function to commuting points is f ↦ S* f with S
the unnormalized symmetrizer.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from loguru import logger

from .clark import DbrSpace, dbr_space, gleason_B, weighted_cauchy
from .errors import (
    ConfigurationError,
    DegenerateInstanceError,
    DimensionMismatchError,
    FreeClarkError,
    LiftCheckError,
    NonUnitalViolationError,
    NotContractionError,
    NotHerglotzError,
)
from .freecore import (
    EMPTY,
    MultiIndex,
    Side,
    TruncatedFock,
    abelianize,
    enumerate_multi_indices,
    enumerate_words,
    multinomial,
    symmetrizer,
)
from .gns import RANK_TOL, GnsSpace, build_gns, factor_gram
from .herglotz_ac import (
    MomentFunctional,
    cayley_to_schur,
    herglotz_from_moments,
    moments_from_schur,
)
from .kernels import PSD_TOL, psd_check
from .series import (
    CommSeries,
    FreeSeries,
    comm_invert,
    comm_multiply,
    symmetrize_series,
    transpose_series,
)

LIFT_TOL = 1e-9
CONSTRAINT_TOL = 1e-8


# ============================================================================
# Types
# ============================================================================


@dataclass(frozen=True, eq=False)
class CommMomentFunctional:
    """μ_b(I) and μ_b(L^n) for 1 ≤ |n| ≤ N on the symmetrized operator system."""

    d: int
    m: int
    N: int
    mu_I: np.ndarray
    moments: Mapping[MultiIndex, np.ndarray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        mu_I = np.asarray(self.mu_I, dtype=complex)
        if mu_I.shape != (self.m, self.m):
            raise ConfigurationError(f"mu_I must be {self.m}x{self.m}, got {mu_I.shape}")
        if np.max(np.abs(mu_I - mu_I.conj().T), initial=0.0) > 1e-10 * max(
            1.0, float(np.max(np.abs(mu_I), initial=0.0))
        ):
            raise NotHerglotzError("mu(I) must be Hermitian")
        eigs = np.linalg.eigvalsh(0.5 * (mu_I + mu_I.conj().T))
        if eigs[0] < -PSD_TOL * max(1.0, float(np.max(np.abs(eigs)))):
            raise NotHerglotzError(f"mu(I) is not positive semidefinite (min eig {eigs[0]:.3g})")
        moments = {
            tuple(int(k) for k in n): np.asarray(v, dtype=complex)
            for n, v in self.moments.items()
        }
        object.__setattr__(self, "mu_I", mu_I)
        object.__setattr__(self, "moments", moments)

    @property
    def origin(self) -> MultiIndex:
        return (0,) * self.d

    def value(self, n: MultiIndex) -> np.ndarray:
        if sum(n) == 0:
            return self.mu_I
        try:
            return self.moments[tuple(n)]
        except KeyError:
            raise ConfigurationError(f"Moment for multi-index {n} is not available") from None

    def max_difference(self, other: CommMomentFunctional, max_len: int | None = None) -> float:
        top = min(self.N, other.N) if max_len is None else max_len
        err = 0.0
        for n in enumerate_multi_indices(self.d, top):
            err = max(err, float(np.max(np.abs(self.value(n) - other.value(n)))))
        return err


@dataclass(frozen=True, eq=False)
class CommHerglotzSpace:
    """H²(μ_b) truncated to the symmetric vectors K̃_n with |n| ≤ N."""

    mu: CommMomentFunctional
    b: CommSeries
    multi_indices: list[MultiIndex]
    gram: np.ndarray
    eigenvalues: np.ndarray
    coords: np.ndarray

    @property
    def rank(self) -> int:
        return int(self.coords.shape[0])

    def block(self, n: MultiIndex) -> slice:
        k = self.multi_indices.index(tuple(n)) * self.mu.m
        return slice(k, k + self.mu.m)

    def K(self, n: MultiIndex) -> np.ndarray:
        """K̃_n in ON coordinates."""
        return self.coords[:, self.block(n)]


@dataclass(frozen=True, eq=False)
class RowContractionExt:
    """A row contraction D = (D_1, …, D_d) on H²(μ_b) extending the partial isometry V^b."""

    space: CommHerglotzSpace
    D: tuple[np.ndarray, ...]
    tight: bool

    @property
    def row(self) -> np.ndarray:
        return np.hstack(self.D)

    @property
    def row_norm(self) -> float:
        row = self.row
        return float(np.linalg.norm(row, 2)) if row.size else 0.0

    def extension_defect(self, V: RowContractionExt) -> float:
        """‖D (V*V) − V‖."""
        Vrow = V.row
        if Vrow.size == 0:
            return 0.0
        return float(np.max(np.abs(self.row @ (Vrow.conj().T @ Vrow) - Vrow)))


@dataclass(frozen=True, eq=False)
class CommDbrSpace:
    """H(b) in monomial coefficients; ON coordinates c = Λ^{-1/2} V* f."""

    b: CommSeries
    multi_indices: list[MultiIndex]
    D: np.ndarray
    eigenvalues: np.ndarray
    vecs: np.ndarray

    @property
    def rank(self) -> int:
        return int(self.eigenvalues.size)

    @property
    def kernel_coords(self) -> np.ndarray:
        return np.sqrt(self.eigenvalues)[:, None] * self.vecs.conj().T

    def coordinates(self, f: np.ndarray) -> np.ndarray:
        return (self.vecs.conj().T @ f) / np.sqrt(self.eigenvalues)[:, None]

    def vectors(self, c: np.ndarray) -> np.ndarray:
        return (self.vecs * np.sqrt(self.eigenvalues)[None, :]) @ c

    def inner(self, f: np.ndarray, g: np.ndarray) -> np.ndarray:
        return self.coordinates(f).conj().T @ self.coordinates(g)


# ============================================================================
# Monomial-coefficient helpers
# ============================================================================


def _lookup(indices: list[MultiIndex]) -> dict[MultiIndex, int]:
    return {n: k for k, n in enumerate(indices)}


def comm_columns(b: CommSeries, indices: list[MultiIndex]) -> np.ndarray:
    out = np.zeros((len(indices) * b.m, b.m), dtype=complex)
    for k, n in enumerate(indices):
        out[k * b.m : (k + 1) * b.m] = b.coeff(n)
    return out


def comm_mult_matrix(b: CommSeries, indices: list[MultiIndex]) -> np.ndarray:
    """Multiplication by b(z) on monomial coefficients of degree ≤ N."""
    lookup = _lookup(indices)
    m = b.m
    M = np.zeros((len(indices) * m, len(indices) * m), dtype=complex)
    for col, n in enumerate(indices):
        for k, bk in b.coeffs.items():
            target = tuple(x + y for x, y in zip(n, k, strict=True))
            row = lookup.get(target)
            if row is not None:
                M[row * m : (row + 1) * m, col * m : (col + 1) * m] += bk
    return M


def variable_shift(indices: list[MultiIndex], d: int, m: int, j: int) -> np.ndarray:
    """Multiplication by z_j on monomial coefficients; top degree maps to 0."""
    lookup = _lookup(indices)
    S = np.zeros((len(indices) * m, len(indices) * m))
    for col, n in enumerate(indices):
        target = tuple(x + (1 if i == j - 1 else 0) for i, x in enumerate(n))
        row = lookup.get(target)
        if row is not None:
            S[row * m : (row + 1) * m, col * m : (col + 1) * m] = np.eye(m)
    return S


# ============================================================================
# Cayley transforms and moments
# ============================================================================


def _comm_identity(d: int, m: int, N: int) -> CommSeries:
    return CommSeries.constant(d, m, N, 1.0)


def comm_cayley(b: CommSeries, cond_guard: float = 1e12) -> CommSeries:
    """H_b = (I − b)^{-1}(I + b)."""
    ident = _comm_identity(b.d, b.m, b.N)
    return comm_multiply(comm_invert(ident + b.scale(-1.0), cond_guard), ident + b)


def comm_cayley_inv(H: CommSeries, cond_guard: float = 1e12) -> CommSeries:
    """b = (H + I)^{-1}(H − I)."""
    ident = _comm_identity(H.d, H.m, H.N)
    return comm_multiply(comm_invert(H + ident, cond_guard), H + ident.scale(-1.0))


def comm_moments(b: CommSeries, margin: float = 1e-8) -> CommMomentFunctional:
    """μ_b(I) = Re H_b(0) and μ_b(L^n) = ½ (H_b)_n*."""
    b0 = b.coeff(b.origin)
    if float(np.linalg.norm(b0, 2)) >= 1.0 - margin:
        raise NonUnitalViolationError(f"b(0) has norm ≥ 1 - {margin:g}")
    H = comm_cayley(b)
    h0 = H.coeff(H.origin)
    moments = {
        n: 0.5 * H.coeff(n).conj().T for n in enumerate_multi_indices(b.d, b.N) if sum(n) > 0
    }
    return CommMomentFunctional(b.d, b.m, b.N, 0.5 * (h0 + h0.conj().T), moments)


def comm_herglotz_from_moments(
    mu: CommMomentFunctional, imag: np.ndarray | None = None
) -> CommSeries:
    coeffs = {n: 2.0 * mu.value(n).conj().T for n in enumerate_multi_indices(mu.d, mu.N)}
    h0 = mu.mu_I.copy() if imag is None else mu.mu_I + np.asarray(imag, dtype=complex)
    coeffs[mu.origin] = h0
    return CommSeries(mu.d, mu.m, mu.N, coeffs)


def comm_schur_from_moments(
    mu: CommMomentFunctional, imag: np.ndarray | None = None
) -> CommSeries:
    """The Schur function of μ with Im H_b(0) = imag/i, zero by default."""
    return comm_cayley_inv(comm_herglotz_from_moments(mu, imag))


def fiber_moments(phi: MomentFunctional) -> CommMomentFunctional:
    """Σ_{λ(α)=n} φ(L^α): the restriction of a free functional to symmetric monomials."""
    sums: dict[MultiIndex, np.ndarray] = {}
    for w in enumerate_words(phi.d, phi.N)[1:]:
        n = abelianize(w, phi.d)
        sums[n] = sums[n] + phi.value(w) if n in sums else phi.value(w).copy()
    return CommMomentFunctional(phi.d, phi.m, phi.N, phi.phi_I, sums)


# ============================================================================
# Herglotz space and V^b
# ============================================================================


def symmetric_gram(mu: CommMomentFunctional) -> np.ndarray:
    """Gram of K̃_n: (|n|!/n!) μ(L^{k−n}) if k ≥ n, its adjoint rule if n ≥ k, else 0."""
    indices = enumerate_multi_indices(mu.d, mu.N)
    m = mu.m
    G = np.zeros((len(indices) * m, len(indices) * m), dtype=complex)
    for r, n in enumerate(indices):
        for c, k in enumerate(indices):
            if all(x <= y for x, y in zip(n, k, strict=True)):
                diff = tuple(y - x for x, y in zip(n, k, strict=True))
                entry = multinomial(n) * mu.value(diff)
            elif all(x >= y for x, y in zip(n, k, strict=True)):
                diff = tuple(x - y for x, y in zip(n, k, strict=True))
                entry = multinomial(k) * mu.value(diff).conj().T
            else:
                continue
            G[r * m : (r + 1) * m, c * m : (c + 1) * m] = entry
    return G


def build_herglotz_space(
    mu: CommMomentFunctional,
    b: CommSeries | None = None,
    rank_tol: float = RANK_TOL,
    psd_tol: float = PSD_TOL,
) -> CommHerglotzSpace:
    G = symmetric_gram(mu)
    report = psd_check(G, psd_tol)
    if not report.passed:
        raise NotHerglotzError(f"Symmetric Gram has min eigenvalue {report.min_eig:.3g}")
    eigs, X = factor_gram(G, rank_tol)
    logger.debug(f"Commutative Herglotz space: raw dim {G.shape[0]}, rank {eigs.size}")
    return CommHerglotzSpace(
        mu=mu,
        b=b if b is not None else comm_schur_from_moments(mu),
        multi_indices=enumerate_multi_indices(mu.d, mu.N),
        gram=G,
        eigenvalues=eigs,
        coords=X,
    )


def build_Vb(space: CommHerglotzSpace, rank_tol: float = RANK_TOL) -> RowContractionExt:
    """Minimal-norm solution of Σ_j V_j K̃_{n−e_j} = K̃_n, zero off the initial space."""
    mu, r = space.mu, space.rank
    targets, columns = [], []
    for n in space.multi_indices:
        if sum(n) == 0:
            continue
        blocks = []
        for j in range(mu.d):
            if n[j] > 0:
                prev = tuple(x - (1 if i == j else 0) for i, x in enumerate(n))
                blocks.append(space.K(prev))
            else:
                blocks.append(np.zeros((r, mu.m), dtype=complex))
        columns.append(np.vstack(blocks))
        targets.append(space.K(n))
    if not columns or r == 0:
        zero = np.zeros((r, r), dtype=complex)
        return RowContractionExt(space=space, D=tuple(zero for _ in range(mu.d)), tight=True)
    U, T = np.hstack(columns), np.hstack(targets)
    V = T @ sla.pinv(U, rtol=np.sqrt(rank_tol))
    residual = float(np.max(np.abs(V @ U - T)))
    if residual > CONSTRAINT_TOL * max(1.0, float(np.max(np.abs(T)))):
        raise DegenerateInstanceError(f"V^b constraints are inconsistent (residual {residual:.3g})")
    logger.debug(f"V^b solved with residual {residual:.3g}")
    return RowContractionExt(
        space=space, D=tuple(V[:, j * r : (j + 1) * r] for j in range(mu.d)), tight=True
    )


def partial_isometry_defect(V: RowContractionExt) -> float:
    """max(‖V V*V − V‖, distance of the eigenvalues of V*V from {0, 1})."""
    row = V.row
    if row.size == 0:
        return 0.0
    P = row.conj().T @ row
    eigs = np.linalg.eigvalsh(0.5 * (P + P.conj().T))
    spectral = float(np.max(np.minimum(np.abs(eigs), np.abs(eigs - 1.0))))
    return max(float(np.max(np.abs(row @ P - row))), spectral)


def random_extension(V: RowContractionExt, seed: int, rho: float) -> RowContractionExt:
    """D = V + C(I − V*V) with ran C ⊥ ran V and ‖C(I − V*V)‖ = ρ."""
    if not 0.0 <= rho <= 1.0:
        raise ConfigurationError(f"Extension norm must lie in [0, 1], got {rho}")
    row = V.row
    r, rd = row.shape
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((r, rd)) + 1j * rng.standard_normal((r, rd))
    C = (np.eye(r) - row @ row.conj().T) @ raw @ (np.eye(rd) - row.conj().T @ row)
    norm = float(np.linalg.norm(C, 2)) if C.size else 0.0
    if rho == 0.0 or norm < 1e-10:
        C = np.zeros_like(C)
    else:
        C *= rho / norm
    D = row + C
    return RowContractionExt(
        space=V.space,
        D=tuple(D[:, j * r : (j + 1) * r] for j in range(len(V.D))),
        tight=not np.any(C),
    )


def extension_residual(ext: RowContractionExt) -> float:
    """max_n ‖K̃_n − Σ_j D_j K̃_{n−e_j}‖, coefficients of K_z = (I − D z*)^{-1} K_0."""
    space = ext.space
    err = 0.0
    for n in space.multi_indices:
        if sum(n) == 0:
            continue
        acc = np.zeros_like(space.K(n))
        for j in range(space.mu.d):
            if n[j] > 0:
                prev = tuple(x - (1 if i == j else 0) for i, x in enumerate(n))
                acc += ext.D[j] @ space.K(prev)
        err = max(err, float(np.max(np.abs(acc - space.K(n)))))
    return err


# ============================================================================
# Symmetric extensions and free lifts
# ============================================================================


def phi_from_extension(ext: RowContractionExt) -> MomentFunctional:
    """φ_D(L^α) = K̃_0* D^α K̃_0 for |α| ≤ N."""
    space = ext.space
    mu = space.mu
    K0 = space.K(mu.origin)
    images: dict[tuple[int, ...], np.ndarray] = {EMPTY: K0}
    moments = {}
    for w in enumerate_words(mu.d, mu.N)[1:]:
        images[w] = ext.D[w[0] - 1] @ images[w[1:]]
        moments[w] = K0.conj().T @ images[w]
    phi_I = K0.conj().T @ K0
    return MomentFunctional(mu.d, mu.m, mu.N, 0.5 * (phi_I + phi_I.conj().T), moments)


def lift_from_extension(ext: RowContractionExt) -> tuple[FreeSeries, FreeSeries]:
    """The free Schur pair (B^L, B^R) of φ_D, carrying over Im H_b(0)."""
    phi = phi_from_extension(ext)
    b = ext.space.b
    h0 = comm_cayley(b).coeff(b.origin)
    H = herglotz_from_moments(phi, Side.LEFT, 0.5 * (h0 - h0.conj().T))
    left = cayley_to_schur(H, Side.LEFT)
    return left, transpose_series(left)


def symmetric_embedding(
    g: GnsSpace, space: CommHerglotzSpace, rank_tol: float = RANK_TOL
) -> np.ndarray:
    """J: H²(μ_b) → F²(μ) in ON coordinates, K̃_n ↦ Σ_{λ(α)=n} L^α ⊗ [I⊗]."""
    S = symmetrizer(g.fock).vectors
    return g.coords @ S @ sla.pinv(space.coords, rtol=np.sqrt(rank_tol))


def dilation_error(ext: RowContractionExt, g: GnsSpace | None = None) -> float:
    """Compression of the GNS row isometry of φ_D to H²(μ_b) against D on degree < N."""
    g = g or build_gns(phi_from_extension(ext))
    space = ext.space
    J = symmetric_embedding(g, space)
    degrees = np.repeat([sum(n) for n in space.multi_indices], space.mu.m)
    cols = space.coords[:, degrees < space.mu.N]
    err = float(np.max(np.abs(J.conj().T @ J - np.eye(J.shape[1])), initial=0.0))
    for P, D in zip(g.piL, ext.D, strict=True):
        err = max(err, float(np.max(np.abs(J.conj().T @ P @ J @ cols - D @ cols), initial=0.0)))
    return err


@dataclass(frozen=True)
class LiftCheck:
    symmetrization_error: float
    moment_error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return max(self.symmetrization_error, self.moment_error) <= self.tolerance


def check_free_lift(
    B: FreeSeries, b: CommSeries, side: Side = Side.LEFT, tol: float = LIFT_TOL
) -> LiftCheck:
    """B lifts b iff its symmetrization is b and μ_B restricts to μ_b."""
    if (B.d, B.m, B.N) != (b.d, b.m, b.N):
        raise DimensionMismatchError("Free and commutative series have different (d, m, N)")
    sym_err = symmetrize_series(B).max_difference(b)
    try:
        moment_err = fiber_moments(moments_from_schur(B, side)).max_difference(comm_moments(b))
    except FreeClarkError as exc:
        logger.warning(f"Moment comparison failed: {exc}")
        moment_err = float("inf")
    return LiftCheck(symmetrization_error=sym_err, moment_error=moment_err, tolerance=tol)


def fiber_gram_error(B: FreeSeries, b: CommSeries, side: Side = Side.LEFT) -> float:
    """‖S* K̂ S − symmetric_gram(μ_b)‖ with K̂ the GNS Gram of μ_B and S the fiber sums.

    The closed form uses comm_moments(b) only, never the free moments.
    """
    if (B.d, B.m, B.N) != (b.d, b.m, b.N):
        raise DimensionMismatchError("Free and commutative series have different (d, m, N)")
    g = build_gns(moments_from_schur(B, side))
    S = symmetrizer(g.fock).vectors
    compressed = S.conj().T @ g.gram @ S
    return float(np.max(np.abs(compressed - symmetric_gram(comm_moments(b)))))


# ============================================================================
# Commutative dB-R space and the restriction co-isometry
# ============================================================================


def comm_dbr_gram(b: CommSeries) -> np.ndarray:
    indices = enumerate_multi_indices(b.d, b.N)
    m = b.m
    weights = [multinomial(n) for n in indices]
    G = np.zeros((len(indices) * m, len(indices) * m), dtype=complex)
    for r, n in enumerate(indices):
        G[r * m : (r + 1) * m, r * m : (r + 1) * m] += weights[r] * np.eye(m)
        for c, k in enumerate(indices):
            for p, wp in zip(indices, weights, strict=True):
                if any(x > y for x, y in zip(p, n, strict=True)) or any(
                    x > y for x, y in zip(p, k, strict=True)
                ):
                    continue
                bn = b.coeffs.get(tuple(x - y for x, y in zip(n, p, strict=True)))
                bk = b.coeffs.get(tuple(x - y for x, y in zip(k, p, strict=True)))
                if bn is not None and bk is not None:
                    G[r * m : (r + 1) * m, c * m : (c + 1) * m] -= wp * bn @ bk.conj().T
    return G


def comm_dbr_space(
    b: CommSeries, psd_tol: float = PSD_TOL, rank_tol: float = RANK_TOL
) -> CommDbrSpace:
    G = comm_dbr_gram(b)
    report = psd_check(G, psd_tol)
    if not report.passed:
        raise NotContractionError(
            f"Commutative dB-R Gram has min eigenvalue {report.min_eig:.3g}; b is not Schur"
        )
    eigs, X = factor_gram(G, rank_tol)
    vecs = X.conj().T / np.sqrt(eigs)[None, :] if eigs.size else X.conj().T
    return CommDbrSpace(
        b=b,
        multi_indices=enumerate_multi_indices(b.d, b.N),
        D=G,
        eigenvalues=eigs,
        vecs=vecs,
    )


@dataclass(frozen=True, eq=False)
class RestrictionMap:
    """C_{H²}: H(B) → H(b) in ON coordinates."""

    matrix: np.ndarray
    free: DbrSpace
    comm: CommDbrSpace

    @property
    def coisometry_defect(self) -> float:
        C = self.matrix
        if C.size == 0:
            return 0.0
        return float(np.linalg.norm(C @ C.conj().T - np.eye(C.shape[0]), 2))


def c_h2(B: FreeSeries, b: CommSeries, side: Side = Side.RIGHT) -> RestrictionMap:
    """Restriction of H^side(B) to commuting points, a co-isometry onto H(b)."""
    lift = check_free_lift(B, b, side)
    if not lift.passed:
        raise LiftCheckError(
            f"B is not a free lift of b (sym error {lift.symmetrization_error:.3g}, "
            f"moment error {lift.moment_error:.3g})"
        )
    free = dbr_space(B, side)
    comm = comm_dbr_space(b)
    S = symmetrizer(free.fock).vectors
    return RestrictionMap(matrix=comm.coordinates(S.conj().T @ free.basis), free=free, comm=comm)


def comm_weighted_cauchy(
    space: CommHerglotzSpace, comm: CommDbrSpace | None = None
) -> np.ndarray:
    """F_b = (I − b) C_b from H²(μ_b) ON coordinates to H(b) ON coordinates."""
    b = space.b
    comm = comm or comm_dbr_space(b)
    ident = _comm_identity(b.d, b.m, b.N)
    M = comm_mult_matrix(ident + b.scale(-1.0), space.multi_indices)
    return comm.coordinates(M @ space.coords.conj().T)


def cauchy_factorization_error(B: FreeSeries, b: CommSeries) -> float:
    """‖F_b − C_{H²} F̂_R J‖ with J the symmetric embedding H²(μ_b) ⊆ F²(μ_B)."""
    restriction = c_h2(B, b, Side.RIGHT)
    g = build_gns(moments_from_schur(B, Side.RIGHT))
    space = build_herglotz_space(comm_moments(b), b)
    F_free = weighted_cauchy(g, B, restriction.free)
    F_comm = comm_weighted_cauchy(space, restriction.comm)
    J = symmetric_embedding(g, space)
    return float(np.max(np.abs(restriction.matrix @ F_free @ J - F_comm), initial=0.0))


# ============================================================================
# Commutative Gleason solutions and Clark intertwining
# ============================================================================


@dataclass(frozen=True, eq=False)
class CommGleason:
    """b[D] and X[D]* in H(b) ON coordinates."""

    dbr: CommDbrSpace
    weighted: np.ndarray
    b_sol: tuple[np.ndarray, ...]
    X_adj: tuple[np.ndarray, ...]
    x_residual: float

    def identity_error(self) -> float:
        """‖Σ_j z_j b_sol_j(z) − (b(z) − b(0))‖ on monomial coefficients."""
        b, indices = self.dbr.b, self.dbr.multi_indices
        total = np.zeros((len(indices) * b.m, b.m), dtype=complex)
        for j, sol in enumerate(self.b_sol, start=1):
            total += variable_shift(indices, b.d, b.m, j) @ self.dbr.vectors(sol)
        target = comm_columns(b, indices)
        target[: b.m] = 0.0
        return float(np.max(np.abs(total - target)))

    def contractivity_excess(self) -> float:
        b0 = self.dbr.b.coeff(self.dbr.b.origin)
        gram = sum(sol.conj().T @ sol for sol in self.b_sol)
        excess = gram - (np.eye(b0.shape[0]) - b0.conj().T @ b0)
        return float(np.linalg.eigvalsh(0.5 * (excess + excess.conj().T))[-1])


def comm_gleason(ext: RowContractionExt, rank_tol: float = RANK_TOL) -> CommGleason:
    """b[D] = F_b D* K̃_0 (I − b(0)) and X[D]* from X*k_n = k_{n−e_j} − b_sol_j b_n*."""
    space = ext.space
    b = space.b
    dbr = comm_dbr_space(b)
    F = comm_weighted_cauchy(space, dbr)
    b0 = b.coeff(b.origin)
    K0 = space.K(space.mu.origin)
    b_sol = tuple(F @ D.conj().T @ K0 @ (np.eye(b.m) - b0) for D in ext.D)

    kc = dbr.kernel_coords
    b_adj = comm_columns(b, dbr.multi_indices).conj().T
    X_adj, residual = [], 0.0
    for j, sol in enumerate(b_sol, start=1):
        shift = variable_shift(dbr.multi_indices, b.d, b.m, j)
        target = kc @ shift.T - sol @ b_adj
        X = target @ sla.pinv(kc, rtol=np.sqrt(rank_tol)) if kc.size else kc[:, :0]
        residual = max(residual, float(np.max(np.abs(X @ kc - target), initial=0.0)))
        X_adj.append(X)
    return CommGleason(dbr=dbr, weighted=F, b_sol=b_sol, X_adj=tuple(X_adj), x_residual=residual)


@dataclass(frozen=True)
class CommClarkReport:
    lhs_rhs_error: float
    gleason_error: float
    gleason_excess: float
    x_residual: float
    extension_residual: float
    weighted_isometry_defect: float

    @property
    def max_error(self) -> float:
        return max(
            self.lhs_rhs_error,
            self.gleason_error,
            self.x_residual,
            self.extension_residual,
            self.weighted_isometry_defect,
        )

    def passed(self, tol: float = 1e-7) -> bool:
        return self.max_error < tol and self.gleason_excess <= tol


def verify_comm_clark(ext: RowContractionExt) -> CommClarkReport:
    """F_b D_j* F_b* k_n = k_{n−e_j} + b[D]_j (I − b(0))^{-1}(δ_{n0} I − b_n*)."""
    gl = comm_gleason(ext)
    dbr, F = gl.dbr, gl.weighted
    b = dbr.b
    indices = dbr.multi_indices
    resolvent = np.linalg.inv(np.eye(b.m) - b.coeff(b.origin))
    unit_row = np.zeros((b.m, len(indices) * b.m), dtype=complex)
    unit_row[:, : b.m] = np.eye(b.m)
    b_adj = comm_columns(b, indices).conj().T
    err = 0.0
    for j, (D, sol) in enumerate(zip(ext.D, gl.b_sol, strict=True), start=1):
        applied = dbr.vectors(F @ D.conj().T @ F.conj().T @ dbr.kernel_coords)
        shift = variable_shift(indices, b.d, b.m, j)
        expected = dbr.D @ shift.T + dbr.vectors(sol) @ resolvent @ (unit_row - b_adj)
        err = max(err, float(np.max(np.abs(applied - expected), initial=0.0)))
    defect = 0.0
    if F.size:
        defect = float(
            max(
                np.linalg.norm(F.conj().T @ F - np.eye(F.shape[1]), 2),
                np.linalg.norm(F @ F.conj().T - np.eye(F.shape[0]), 2),
            )
        )
    return CommClarkReport(
        lhs_rhs_error=err,
        gleason_error=gl.identity_error(),
        gleason_excess=gl.contractivity_excess(),
        x_residual=gl.x_residual,
        extension_residual=extension_residual(ext),
        weighted_isometry_defect=defect,
    )


# ============================================================================
# Single-variable Clark family
# ============================================================================


@dataclass(frozen=True, eq=False)
class ClassicalClark:
    alpha: complex
    moments: CommMomentFunctional
    perturbation: np.ndarray

    @property
    def unitary_defect(self) -> float:
        U = self.perturbation
        if U.size == 0:
            return 0.0
        return float(np.linalg.norm(U.conj().T @ U - np.eye(U.shape[0]), 2))


def classical_clark_family(b: CommSeries, alpha: complex) -> ClassicalClark:
    """Moments of μ_{bᾱ} and the perturbation X* + ᾱ b̂ (1 − ᾱ b(0))^{-1} k_0* on H(b)."""
    if b.d != 1 or b.m != 1:
        raise ConfigurationError("The classical Clark family needs d = 1 and m = 1")
    if abs(abs(alpha) - 1.0) > 1e-12:
        raise ConfigurationError(f"alpha must lie on the unit circle, got |alpha| = {abs(alpha)}")
    rotated = b.scale(np.conj(alpha))
    dbr = comm_dbr_space(b)
    indices = dbr.multi_indices
    B = FreeSeries(1, 1, b.N, {(1,) * n[0]: c for n, c in b.coeffs.items()})
    # d = 1: the word 1^k and the multi-index (k,) occupy the same position
    bhat = gleason_B(B, Side.RIGHT).columns(TruncatedFock(1, 1, b.N))[0]
    shift = variable_shift(indices, 1, 1, 1)
    X_adj = dbr.coordinates(shift.T @ dbr.vectors(np.eye(dbr.rank)))
    k0_adj = dbr.kernel_coords[:, :1].conj().T
    perturbation = (
        np.conj(alpha) * dbr.coordinates(bhat) / (1.0 - np.conj(alpha) * b.coeff((0,))[0, 0])
    ) @ k0_adj
    return ClassicalClark(
        alpha=complex(alpha), moments=comm_moments(rotated), perturbation=X_adj + perturbation
    )


