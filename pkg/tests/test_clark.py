"""Tests for dB-R spaces, Gleason solutions and the free Clark intertwining."""

from __future__ import annotations

from dataclasses import replace

import numpy as np
import pytest

from freeclark.clark import (
    GleasonSolution,
    backward_shift,
    cauchy_isometry_defect,
    cauchy_transform,
    cauchy_transform_left,
    clark_family,
    dbr_space,
    gleason_B,
    gleason_constraint_solution,
    gleason_X,
    kernel_identity_error,
    perturbation_coisometry_defect,
    row_contraction_excess,
    transposition_error,
    transposition_W,
    unitary_defect,
    verify_clark,
    weighted_cauchy,
)
from freeclark.errors import ConfigurationError, DimensionMismatchError, NotContractionError
from freeclark.freecore import Side, TruncatedFock, transposition_unitary
from freeclark.generators import random_free_schur, random_unitary
from freeclark.gns import build_gns
from freeclark.herglotz_ac import moments_from_schur
from freeclark.series import FreeSeries, transpose_series

# ============================================================================
# Tests: dB-R space
# ============================================================================


def test_zero_series_space_is_the_whole_fock_space() -> None:
    space = dbr_space(FreeSeries.zero(2, 1, 2))

    assert space.rank == space.fock.dim
    assert np.allclose(space.projector, np.eye(space.fock.dim))


def test_non_contraction_is_rejected() -> None:
    with pytest.raises(NotContractionError):
        dbr_space(FreeSeries(1, 1, 3, {(1,): 1.5}))


def test_coordinates_invert_vectors(small_free: FreeSeries) -> None:
    space = dbr_space(transpose_series(small_free))
    c = np.eye(space.rank)[:, :3]

    assert np.allclose(space.coordinates(space.vectors(c)), c)
    assert np.allclose(space.inner(space.basis, space.basis), np.eye(space.rank))


def test_backward_shift_drops_leading_or_trailing_letter() -> None:
    fock = TruncatedFock(2, 1, 2)
    e12 = np.zeros(fock.dim)
    e12[fock.basis_index((1, 2), 0)] = 1.0

    right = backward_shift(fock, Side.RIGHT, 1) @ e12
    left = backward_shift(fock, Side.LEFT, 2) @ e12

    assert right[fock.basis_index((2,), 0)] == 1.0
    assert left[fock.basis_index((1,), 0)] == 1.0
    assert np.allclose(backward_shift(fock, Side.RIGHT, 2) @ e12, 0.0)


# ============================================================================
# Tests: Gleason solutions
# ============================================================================


@pytest.mark.parametrize("side", list(Side))
def test_gleason_solution_identity(small_free_matrix: FreeSeries, side: Side) -> None:
    assert gleason_B(small_free_matrix, side).identity_error() < 1e-14


def test_gleason_components_shift_coefficients() -> None:
    B = FreeSeries(2, 1, 2, {(1, 2): 0.5, (2,): 0.25})

    right = gleason_B(B, Side.RIGHT).components
    left = gleason_B(B, Side.LEFT).components
    assert np.isclose(right[0].coeff((2,))[0, 0], 0.5)
    assert np.isclose(right[1].coeff(())[0, 0], 0.25)
    assert np.isclose(left[1].coeff((1,))[0, 0], 0.5)
    assert np.isclose(left[1].coeff(())[0, 0], 0.25)


@pytest.mark.parametrize("side", list(Side))
def test_gleason_constraints_have_a_unique_solution(small_free: FreeSeries, side: Side) -> None:
    solution, nullity = gleason_constraint_solution(small_free, side)
    direct = gleason_B(small_free, side)

    assert nullity == 0
    for a, b in zip(solution.components, direct.components, strict=True):
        assert a.max_difference(b) < 1e-10


def test_gleason_constraints_leave_the_zero_series_undetermined() -> None:
    solution, nullity = gleason_constraint_solution(FreeSeries.zero(2, 1, 3))

    # 7 coefficient rows of degree ≤ 2 per component, each free in C^1
    assert nullity == 2 * 7
    assert all(c.max_difference(FreeSeries.zero(2, 1, 3)) == 0.0 for c in solution.components)


@pytest.mark.parametrize("side", list(Side))
def test_perturbed_gleason_solution_breaks_kernel_identity(
    small_free: FreeSeries, side: Side
) -> None:
    B = small_free if side == Side.LEFT else transpose_series(small_free)
    comps = list(gleason_B(B, side).components)
    comps[0] = comps[0] + FreeSeries.constant(B.d, B.m, B.N, 0.1 * np.eye(B.m))
    perturbed = GleasonSolution(B=B, side=side, components=tuple(comps))

    assert kernel_identity_error(B, side, perturbed) > 1e-3
    assert perturbed.identity_error() > 1e-3


@pytest.mark.parametrize("side", list(Side))
def test_gleason_solution_is_contractive(small_free: FreeSeries, side: Side) -> None:
    B = small_free if side == Side.LEFT else transpose_series(small_free)
    space = dbr_space(B, side)

    assert gleason_B(B, side).contractivity_excess(space) <= 1e-8
    assert row_contraction_excess(gleason_X(space)) <= 1e-8


def test_gleason_X_is_contractive_for_matrix_series(small_free_matrix: FreeSeries) -> None:
    space = dbr_space(transpose_series(small_free_matrix), Side.RIGHT)

    assert row_contraction_excess(gleason_X(space)) <= 1e-8


@pytest.mark.parametrize("side", list(Side))
def test_gleason_X_acts_as_the_backward_shift_below_the_top_degree(
    small_free: FreeSeries, side: Side
) -> None:
    B = small_free if side == Side.LEFT else transpose_series(small_free)
    space = dbr_space(B, side)
    rows = space.fock.word_degrees() <= space.fock.N - 1

    for j, x in enumerate(gleason_X(space), start=1):
        shifted = backward_shift(space.fock, side, j) @ space.basis
        assert np.max(np.abs((space.vectors(x) - shifted)[rows])) < 1e-10


@pytest.mark.parametrize("side", list(Side))
def test_kernel_identity_on_safe_rows(small_free: FreeSeries, side: Side) -> None:
    B = small_free if side == Side.LEFT else transpose_series(small_free)

    assert kernel_identity_error(B, side) < 1e-10


# ============================================================================
# Tests: Clark intertwining
# ============================================================================


def test_unitary_defect() -> None:
    assert unitary_defect(np.eye(3)) == 0.0
    assert unitary_defect(np.zeros((0, 0))) == 0.0
    assert unitary_defect(2 * np.eye(2)) == pytest.approx(3.0)


def test_clark_intertwining_right(small_free: FreeSeries) -> None:
    report = verify_clark(transpose_series(small_free), Side.RIGHT)

    assert report.side == Side.RIGHT
    assert report.safe_degree == 4 - 2 - 1
    assert report.passed()
    assert report.cauchy_isometry_defect < 1e-8
    assert report.coisometry_defect < 1e-10


def test_clark_intertwining_left_matches_transposed_right(small_free: FreeSeries) -> None:
    report = verify_clark(small_free, Side.LEFT)

    assert report.passed()
    assert report.transposition_error < 1e-7
    assert report.coisometry_defect < 1e-10
    assert report.cauchy_isometry_defect < 1e-8


def test_clark_perturbation_of_the_shift_is_coisometric() -> None:
    B = FreeSeries(1, 1, 3, {(1,): 1.0})

    assert perturbation_coisometry_defect(B) < 1e-12


def test_wrong_gleason_data_breaks_coisometry() -> None:
    B = FreeSeries(1, 1, 3, {(1,): 1.0})
    wrong = GleasonSolution(B=B, side=Side.RIGHT, components=(FreeSeries(1, 1, 3, {(): 1.5}),))

    assert perturbation_coisometry_defect(B, Side.RIGHT, wrong) == pytest.approx(0.75)


def test_coisometry_defect_counts_towards_max_error(small_free: FreeSeries) -> None:
    report = verify_clark(transpose_series(small_free), Side.RIGHT)
    broken = replace(report, coisometry_defect=0.5)

    assert broken.max_error == 0.5
    assert not broken.passed()


@pytest.mark.parametrize("seed", [3, 8])
def test_weighted_cauchy_is_unitary_without_safe_rows(seed: int) -> None:
    right = random_free_schur(d=2, m=1, deg=2, rho=0.7, seed=seed, N=2)
    g = build_gns(moments_from_schur(right, Side.RIGHT))

    assert unitary_defect(weighted_cauchy(g, right)) < 1e-8
    assert verify_clark(right, Side.RIGHT).weighted_isometry_defect < 1e-8


def test_clark_intertwining_for_zero_series() -> None:
    report = verify_clark(FreeSeries.zero(2, 1, 2))

    assert report.max_error < 1e-10
    assert report.weighted_isometry_defect < 1e-10


def test_transposition_unitary_between_spaces(small_free: FreeSeries) -> None:
    W, right, left = transposition_W(transpose_series(small_free))

    assert unitary_defect(W) < 1e-7
    assert transposition_error(W, right, left) < 1e-7


# ============================================================================
# Tests: Clark family
# ============================================================================


def test_clark_family_shares_the_dbr_space(small_free_matrix: FreeSeries) -> None:
    U = random_unitary(2, seed=9)
    report = clark_family(small_free_matrix, U)

    assert report.dbr_difference < 1e-12
    assert np.allclose(report.rotated.coeff((1,)), small_free_matrix.coeff((1,)) @ U.conj().T)
    assert report.clark.passed()


def test_clark_family_validates_the_unitary(small_free_matrix: FreeSeries) -> None:
    with pytest.raises(DimensionMismatchError):
        clark_family(small_free_matrix, np.eye(3))
    with pytest.raises(ConfigurationError):
        clark_family(small_free_matrix, 2 * np.eye(2))


# ============================================================================
# Tests: Cauchy transforms
# ============================================================================


def test_cauchy_transform_is_isometric(small_free: FreeSeries) -> None:
    g = build_gns(moments_from_schur(small_free))
    C = cauchy_transform(g, small_free)

    right = transpose_series(small_free)

    assert C.shape == (g.fock.dim, g.rank)
    assert cauchy_isometry_defect(right, C) < 1e-8
    assert cauchy_isometry_defect(right, C[:, :0]) == 0.0


def test_scaled_cauchy_transform_is_not_isometric(small_free: FreeSeries) -> None:
    g = build_gns(moments_from_schur(small_free))
    C = cauchy_transform(g, small_free)

    assert cauchy_isometry_defect(transpose_series(small_free), 1.1 * C) == pytest.approx(
        0.21, abs=1e-6
    )
    with pytest.raises(DimensionMismatchError):
        cauchy_isometry_defect(transpose_series(small_free), C[:-1])


def test_left_cauchy_transform_transposes_coefficients(small_free: FreeSeries) -> None:
    g = build_gns(moments_from_schur(small_free))

    T = transposition_unitary(g.fock)
    assert np.allclose(cauchy_transform_left(g), T @ cauchy_transform(g))
