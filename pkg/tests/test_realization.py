"""Tests for canonical colligations and transfer-function realizations."""

from __future__ import annotations

import numpy as np
import pytest

from freeclark.commutative import (
    RowContractionExt,
    build_herglotz_space,
    build_Vb,
    comm_moments,
    random_extension,
)
from freeclark.errors import DimensionMismatchError, ResolventError
from freeclark.freecore import Side
from freeclark.generators import random_comm_schur, random_nilpotent_point
from freeclark.realization import (
    Colligation,
    comm_colligation_from_D,
    comm_transfer_coeffs,
    comm_transfer_eval,
    free_colligation,
    nilpotent_exactness_error,
    observability_rank,
    route_agreement_error,
    transfer_coeffs,
    transfer_eval,
    transfer_tail_bound,
)
from freeclark.series import CommSeries, FreeSeries, NCPoint, eval_nc, transpose_series

# ============================================================================
# Tests: Colligation container
# ============================================================================


def test_colligation_shape_validation() -> None:
    with pytest.raises(DimensionMismatchError):
        Colligation(
            A=(np.zeros((2, 2)),), Bblk=np.zeros((3, 1)), Cblk=np.zeros((1, 2)), Dblk=np.eye(1)
        )
    with pytest.raises(DimensionMismatchError):
        Colligation(
            A=(np.zeros((2, 2)), np.zeros((3, 3))),
            Bblk=np.zeros((4, 1)),
            Cblk=np.zeros((1, 2)),
            Dblk=np.eye(1),
        )


def test_colligation_operator_layout() -> None:
    c = Colligation(
        A=(np.array([[0.1]]), np.array([[0.2]])),
        Bblk=np.array([[0.3], [0.4]]),
        Cblk=np.array([[0.5]]),
        Dblk=np.array([[0.6]]),
    )

    assert c.d == 2
    assert c.m == 1
    assert c.state_dim == 1
    assert np.allclose(c.operator, [[0.1, 0.3], [0.2, 0.4], [0.5, 0.6]])
    assert np.allclose(c.B_slot(2), [[0.4]])


# ============================================================================
# Tests: Free colligations
# ============================================================================


def test_shift_has_one_dimensional_realization() -> None:
    """B = Z in one variable: H(B) is the constants, A = 0 and C B = 1."""
    c = free_colligation(FreeSeries(1, 1, 2, {(1,): 1.0}))

    assert c.state_dim == 1
    assert np.allclose(c.A[0], 0.0)
    assert np.allclose(c.Dblk, 0.0)
    assert np.isclose(abs(c.Cblk[0, 0]), 1.0)
    coeffs = transfer_coeffs(c, 2)
    assert np.isclose(coeffs.coeff((1,))[0, 0], 1.0)
    assert np.isclose(coeffs.coeff((1, 1))[0, 0], 0.0)


@pytest.mark.parametrize("side", list(Side))
def test_free_colligation_realizes_the_left_series(small_free: FreeSeries, side: Side) -> None:
    B = transpose_series(small_free) if side == Side.RIGHT else small_free
    c = free_colligation(B, side)

    top = small_free.N - 1
    assert transfer_coeffs(c, top).max_difference(small_free, top) < 1e-10


def test_free_colligation_is_coisometric_and_observable(small_free: FreeSeries) -> None:
    c = free_colligation(transpose_series(small_free))

    assert c.coisometry_defect() < 1e-7
    assert observability_rank(c, small_free.N) == c.state_dim


def test_nilpotent_evaluation_is_exact(small_free_matrix: FreeSeries) -> None:
    c = free_colligation(transpose_series(small_free_matrix))
    N = small_free_matrix.N
    for seed in range(3):
        p = random_nilpotent_point(2, n=N + 1, order=N, seed=seed)
        assert nilpotent_exactness_error(c, small_free_matrix, p) < 1e-10


def test_transfer_eval_sums_the_coefficients(small_free: FreeSeries) -> None:
    c = free_colligation(transpose_series(small_free))
    p = NCPoint((np.array([[0.05]]), np.array([[-0.05j]])))

    series = transfer_coeffs(c, 10)
    assert np.allclose(transfer_eval(c, p), eval_nc(series, p), atol=1e-8)


def test_transfer_eval_checks_the_resolvent() -> None:
    c = Colligation(
        A=(np.array([[0.5]]),), Bblk=np.array([[1.0]]), Cblk=np.array([[1.0]]), Dblk=np.eye(1)
    )

    with pytest.raises(ResolventError):
        transfer_eval(c, NCPoint((np.array([[2.5]]),)))
    with pytest.raises(DimensionMismatchError):
        transfer_eval(c, NCPoint((np.eye(1), np.eye(1))))


def test_transfer_tail_bound() -> None:
    c = Colligation(
        A=(np.array([[0.5]]),), Bblk=np.array([[1.0]]), Cblk=np.array([[1.0]]), Dblk=np.eye(1)
    )

    assert transfer_tail_bound(c, np.array([0.0]), 3) == 0.0
    assert transfer_tail_bound(c, np.array([0.5]), 2) == pytest.approx(0.5 * 0.25**2 / 0.75)
    assert transfer_tail_bound(c, np.array([0.99]), 2) < np.inf


# ============================================================================
# Tests: Commutative colligations
# ============================================================================


def test_comm_realization_of_the_coordinate_function() -> None:
    from freeclark.commutative import build_herglotz_space, build_Vb, comm_moments

    b = CommSeries(1, 1, 3, {(1,): 1.0})
    ext = build_Vb(build_herglotz_space(comm_moments(b), b))
    c = comm_colligation_from_D(ext)

    assert np.isclose(comm_transfer_eval(c, np.array([0.5]))[0, 0], 0.5)


@pytest.mark.parametrize("rho", [0.0, 0.5])
def test_comm_transfer_coefficients(
    small_comm: CommSeries, tight_extension: RowContractionExt, rho: float
) -> None:
    c = comm_colligation_from_D(random_extension(tight_extension, seed=6, rho=rho))

    top = small_comm.N - 1
    assert comm_transfer_coeffs(c, top).max_difference(small_comm, top) < 1e-9


def test_comm_transfer_eval_rejects_points_outside_the_ball(
    tight_extension: RowContractionExt,
) -> None:
    c = comm_colligation_from_D(tight_extension)

    with pytest.raises(ResolventError):
        comm_transfer_eval(c, np.array([0.8, 0.8]))
    with pytest.raises(DimensionMismatchError):
        comm_transfer_eval(c, np.array([0.1]))


def test_routes_to_the_comm_colligation_agree(tight_extension: RowContractionExt) -> None:
    assert route_agreement_error(tight_extension) < 1e-8
    assert route_agreement_error(random_extension(tight_extension, seed=3, rho=0.5)) < 1e-8


def _tight(b: CommSeries) -> RowContractionExt:
    return build_Vb(build_herglotz_space(comm_moments(b), b))


@pytest.mark.parametrize("N", [0, 1])
def test_route_agreement_is_vacuous_without_safe_rows(N: int) -> None:
    b = random_comm_schur(d=2, m=1, deg=min(N, 1), rho=0.5, seed=1, N=N)

    assert route_agreement_error(_tight(b)) == 0.0


def test_route_agreement_on_the_constant_row() -> None:
    b = random_comm_schur(d=2, m=1, deg=1, rho=0.5, seed=1, N=2)

    assert route_agreement_error(_tight(b)) < 1e-8
