"""
Canonical de Branges-Rovnyak colligations and their transfer functions.

A colligation U = [A B; C D] acts from H ⊕ C^m to (H ⊗ C^d) ⊕ C^m and
realizes

    B^L(Z) = D + C (I − Σ_j Z_j ⊗ A_j)^{-1} Σ_j Z_j ⊗ B_j,

with Z_j on the left tensor factor. The coefficient of Z^{wj} is
C A_{w_1}···A_{w_k} B_j. Colligations built on either side realize the left
member of the Schur pair.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from loguru import logger

from .clark import DbrSpace, dbr_space, gleason_B, gleason_X
from .commutative import (
    RestrictionMap,
    RowContractionExt,
    c_h2,
    comm_gleason,
    lift_from_extension,
)
from .errors import DimensionMismatchError, ResolventError
from .freecore import EMPTY, Side, Word, enumerate_words
from .herglotz_ac import check_nonunital
from .series import CommSeries, FreeSeries, NCPoint, eval_nc, symmetrize_series

OBSERVABILITY_TOL = 1e-8
RESOLVENT_MARGIN = 1e-12


@dataclass(frozen=True, eq=False)
class Colligation:
    A: tuple[np.ndarray, ...]
    Bblk: np.ndarray
    Cblk: np.ndarray
    Dblk: np.ndarray
    safe_states: np.ndarray | None = None

    def __post_init__(self) -> None:
        r = self.state_dim
        if any(a.shape != (r, r) for a in self.A):
            raise DimensionMismatchError("State blocks A_j must all be square of the same size")
        if self.Bblk.shape != (self.d * r, self.m) or self.Cblk.shape != (self.m, r):
            raise DimensionMismatchError(
                f"Input/output blocks do not match state dim {r}, d={self.d}, m={self.m}"
            )

    @property
    def d(self) -> int:
        return len(self.A)

    @property
    def m(self) -> int:
        return int(self.Dblk.shape[0])

    @property
    def state_dim(self) -> int:
        return int(self.Cblk.shape[1])

    def B_slot(self, j: int) -> np.ndarray:
        r = self.state_dim
        return self.Bblk[(j - 1) * r : j * r]

    @property
    def operator(self) -> np.ndarray:
        top = np.hstack([np.vstack(self.A), self.Bblk]) if self.A else self.Bblk
        return np.vstack([top, np.hstack([self.Cblk, self.Dblk])])

    def contractivity_excess(self) -> float:
        return max(float(np.linalg.norm(self.operator, 2)) - 1.0, 0.0)

    def coisometry_defect(self) -> float:
        """‖(U*x)*(U*y) − x*y‖ over x, y built from the safe states in each slot and C^m."""
        r, d, m = self.state_dim, self.d, self.m
        S = np.eye(r, dtype=complex) if self.safe_states is None else self.safe_states
        k = S.shape[1]
        X = np.zeros((d * r + m, d * k + m), dtype=complex)
        for j in range(d):
            X[j * r : (j + 1) * r, j * k : (j + 1) * k] = S
        X[d * r :, d * k :] = np.eye(m)
        Y = self.operator.conj().T @ X
        return float(np.max(np.abs(Y.conj().T @ Y - X.conj().T @ X)))


# ============================================================================
# Free colligations
# ============================================================================


def free_colligation(
    B: FreeSeries, side: Side = Side.RIGHT, space: DbrSpace | None = None
) -> Colligation:
    """[X̂*, B̂; k̂_∅*, B_∅] on the side's dB-R space."""
    check_nonunital(B)
    space = space or dbr_space(B, side)
    bhat = gleason_B(B, side).columns(space.fock)
    Bblk = np.vstack([space.coordinates(c) for c in bhat])
    kc = space.kernel_coords
    degrees = space.fock.word_degrees()
    logger.debug(f"Free colligation ({side}) with state dim {space.rank}")
    return Colligation(
        A=gleason_X(space),
        Bblk=Bblk,
        Cblk=kc[:, space.fock.block(EMPTY)].conj().T,
        Dblk=B.coeff(EMPTY).copy(),
        safe_states=kc[:, degrees <= space.fock.N - 1],
    )


def _ampliation(c: Colligation, p: NCPoint) -> tuple[np.ndarray, np.ndarray]:
    if p.d != c.d:
        raise DimensionMismatchError(f"Point has {p.d} matrices, colligation has d={c.d}")
    r = c.state_dim
    ZA = np.zeros((p.n * r, p.n * r), dtype=complex)
    ZB = np.zeros((p.n * r, p.n * c.m), dtype=complex)
    for j, (z, a) in enumerate(zip(p.Z, c.A, strict=True), start=1):
        ZA += np.kron(z, a)
        ZB += np.kron(z, c.B_slot(j))
    return ZA, ZB


def transfer_eval(c: Colligation, p: NCPoint) -> np.ndarray:
    """D + C (I − Z·A)^{-1} Z·B at an NC point, with ampliations I_n ⊗ C and I_n ⊗ D."""
    ZA, ZB = _ampliation(c, p)
    base = np.kron(np.eye(p.n), c.Dblk)
    if c.state_dim == 0:
        return base
    radius = float(np.max(np.abs(np.linalg.eigvals(ZA))))
    if radius >= 1.0 - RESOLVENT_MARGIN:
        raise ResolventError(f"Spectral radius of Z·A is {radius:.6g}; resolvent diverges")
    solved = sla.solve(np.eye(ZA.shape[0]) - ZA, ZB)
    return base + np.kron(np.eye(p.n), c.Cblk) @ solved


def transfer_coeffs(c: Colligation, maxdeg: int) -> FreeSeries:
    """Coefficients C A_{w_1}···A_{w_k} B_j at Z^{wj} up to degree maxdeg."""
    rows: dict[Word, np.ndarray] = {EMPTY: c.Cblk}
    coeffs: dict[Word, np.ndarray] = {EMPTY: c.Dblk}
    for w in enumerate_words(c.d, max(maxdeg - 1, 0)):
        if w:
            rows[w] = rows[w[:-1]] @ c.A[w[-1] - 1]
        if len(w) + 1 > maxdeg:
            continue
        for j in range(1, c.d + 1):
            coeffs[(*w, j)] = rows[w] @ c.B_slot(j)
    return FreeSeries(c.d, c.m, maxdeg, coeffs)


def nilpotent_exactness_error(c: Colligation, B_left: FreeSeries, p: NCPoint) -> float:
    """‖transfer_eval − eval_nc(B^L)‖ at a point whose words of length ≥ N vanish."""
    order = p.nilpotency_order(B_left.N)
    if order is None or order > B_left.N:
        logger.warning("Point is not nilpotent within the truncation; comparison is not exact")
    return float(np.max(np.abs(transfer_eval(c, p) - eval_nc(B_left, p))))


def observability_rank(c: Colligation, max_len: int, tol: float = OBSERVABILITY_TOL) -> int:
    """Rank of f ↦ (C A^w f)_{|w| ≤ max_len}, the finite-truncation observability proxy."""
    if c.state_dim == 0:
        return 0
    rows: dict[Word, np.ndarray] = {EMPTY: c.Cblk}
    for w in enumerate_words(c.d, max_len)[1:]:
        rows[w] = rows[w[:-1]] @ c.A[w[-1] - 1]
    O = np.vstack(list(rows.values()))
    sv = sla.svdvals(O)
    return int(np.sum(sv > tol * max(1.0, float(sv[0]))))


# ============================================================================
# Commutative colligations
# ============================================================================


def comm_colligation_from_free(c: Colligation, restriction: RestrictionMap) -> Colligation:
    """Ad_{C_{H²}}: conjugate the state blocks by the restriction co-isometry."""
    C = restriction.matrix
    if C.shape[1] != c.state_dim:
        raise DimensionMismatchError("Restriction map does not act on the colligation state space")
    kc = restriction.comm.kernel_coords
    degrees = np.repeat([sum(n) for n in restriction.comm.multi_indices], c.m)
    return Colligation(
        A=tuple(C @ a @ C.conj().T for a in c.A),
        Bblk=np.vstack([C @ c.B_slot(j) for j in range(1, c.d + 1)]),
        Cblk=c.Cblk @ C.conj().T,
        Dblk=c.Dblk.copy(),
        safe_states=kc[:, degrees <= max(degrees, default=0) - 1],
    )


def comm_colligation_from_D(ext: RowContractionExt) -> Colligation:
    """[X[D]*, b[D]; k_0*, b(0)] from the Gleason solution of a row-contractive extension."""
    gl = comm_gleason(ext)
    b = gl.dbr.b
    kc = gl.dbr.kernel_coords
    degrees = np.repeat([sum(n) for n in gl.dbr.multi_indices], b.m)
    return Colligation(
        A=gl.X_adj,
        Bblk=np.vstack(gl.b_sol),
        Cblk=kc[:, : b.m].conj().T,
        Dblk=b.coeff(b.origin).copy(),
        safe_states=kc[:, degrees <= b.N - 1],
    )


def comm_transfer_eval(c: Colligation, z: np.ndarray) -> np.ndarray:
    """d + c (I − Σ z_j a_j)^{-1} Σ z_j b_j at a point of the unit ball."""
    z = np.asarray(z, dtype=complex)
    if z.shape != (c.d,):
        raise DimensionMismatchError(f"Point must have {c.d} coordinates, got shape {z.shape}")
    if float(np.linalg.norm(z)) >= 1.0:
        raise ResolventError("Point lies outside the open unit ball")
    if c.state_dim == 0:
        return c.Dblk.copy()
    za = sum(zj * a for zj, a in zip(z, c.A, strict=True))
    zb = sum(zj * c.B_slot(j) for j, zj in enumerate(z, start=1))
    radius = float(np.max(np.abs(np.linalg.eigvals(za))))
    if radius >= 1.0 - RESOLVENT_MARGIN:
        raise ResolventError(f"Spectral radius of z·a is {radius:.6g}; resolvent diverges")
    return c.Dblk + c.Cblk @ sla.solve(np.eye(c.state_dim) - za, zb)


def comm_transfer_coeffs(c: Colligation, maxdeg: int) -> CommSeries:
    return symmetrize_series(transfer_coeffs(c, maxdeg))


def transfer_tail_bound(c: Colligation, z: np.ndarray, N: int) -> float:
    """Bound on Σ_{k > N} of the degree-k terms of the transfer function at z."""
    radius = float(np.linalg.norm(z))
    q = radius * float(np.sqrt(sum(np.linalg.norm(a, 2) ** 2 for a in c.A)))
    if q >= 1.0:
        return float("inf")
    gain = float(np.linalg.norm(c.Cblk, 2) * np.linalg.norm(c.Bblk, 2)) * radius
    return gain * q**N / (1.0 - q)


def route_agreement_error(ext: RowContractionExt) -> float:
    """Blockwise distance between u[D] and Ad_{C_{H²}} of the free colligation of its lift.

    State and input blocks are compared as coefficient vectors on rows of degree
    ≤ N − deg(b) − 1; with no such rows the comparison is vacuous and returns 0.
    """
    b = ext.space.b
    safe = b.N - b.degree - 1
    if safe < 0:
        logger.debug(f"No safe rows at N={b.N}, deg={b.degree}; route agreement is vacuous")
        return 0.0
    _, right = lift_from_extension(ext)
    restriction = c_h2(right, b, Side.RIGHT)
    free = free_colligation(right, Side.RIGHT, restriction.free)
    via_free = comm_colligation_from_free(free, restriction)
    via_D = comm_colligation_from_D(ext)
    comm = restriction.comm
    degrees = np.repeat([sum(n) for n in comm.multi_indices], b.m)
    rows = degrees <= safe
    err = max(
        float(np.max(np.abs(via_free.Cblk - via_D.Cblk), initial=0.0)),
        float(np.max(np.abs(via_free.Dblk - via_D.Dblk))),
    )
    for j in range(1, b.d + 1):
        diff = comm.vectors(via_free.B_slot(j) - via_D.B_slot(j))
        err = max(err, float(np.max(np.abs(diff[rows]), initial=0.0)))
    for a_free, a_D in zip(via_free.A, via_D.A, strict=True):
        diff = comm.vectors((a_free - a_D) @ comm.kernel_coords)
        err = max(err, float(np.max(np.abs(diff[rows]), initial=0.0)))
    return err
