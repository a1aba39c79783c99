"""Tests for the GNS construction of the free Hardy space of a moment functional."""

from __future__ import annotations

import numpy as np
import pytest

from freeclark.errors import NotCompletelyPositiveError
from freeclark.gns import (
    build_gns,
    factor_gram,
    orthonormal_columns,
    quasi_extreme_indicator,
    row_isometry_defect,
    stinespring_check,
)
from freeclark.herglotz_ac import MomentFunctional, moments_from_schur
from freeclark.series import FreeSeries

# ============================================================================
# Tests: Linear algebra helpers
# ============================================================================


def test_factor_gram_reproduces_psd_matrix(rng: np.random.Generator) -> None:
    A = rng.standard_normal((4, 2)) + 1j * rng.standard_normal((4, 2))
    G = A @ A.conj().T
    eigs, X = factor_gram(G)

    assert eigs.size == 2
    assert np.allclose(X.conj().T @ X, G)


def test_orthonormal_columns_of_zero_matrix_is_empty() -> None:
    assert orthonormal_columns(np.zeros((3, 2))).shape == (3, 0)


# ============================================================================
# Tests: GNS space
# ============================================================================


def test_delta_functional_gives_full_fock_space() -> None:
    """B = 0: the moment Gram is the identity, so nothing is collapsed."""
    g = build_gns(MomentFunctional.delta(2, 1, 2))

    assert g.rank == g.fock.dim
    assert stinespring_check(g) < 1e-12
    assert quasi_extreme_indicator(g.phi, g) == pytest.approx(1.0)


def test_inner_series_collapses_to_one_dimension() -> None:
    """B = Z in one variable has all moments equal to one."""
    phi = moments_from_schur(FreeSeries(1, 1, 3, {(1,): 1.0}))
    g = build_gns(phi)

    assert g.rank == 1
    assert np.allclose(g.piL[0], np.eye(1))
    defect = row_isometry_defect(g)
    assert defect.isometry_defect < 1e-10
    assert defect.cuntz_defect < 1e-10
    assert quasi_extreme_indicator(phi, g) < 1e-10


def test_non_positive_functional_is_rejected() -> None:
    phi = MomentFunctional(1, 1, 1, np.eye(1), {(1,): np.array([[2.0]])})

    with pytest.raises(NotCompletelyPositiveError):
        build_gns(phi)


def test_stinespring_dilation_of_random_functional(small_free_matrix: FreeSeries) -> None:
    g = build_gns(moments_from_schur(small_free_matrix))

    assert stinespring_check(g) < 1e-8


def test_gns_row_is_isometric_on_safe_vectors(small_free: FreeSeries) -> None:
    g = build_gns(moments_from_schur(small_free))
    defect = row_isometry_defect(g)

    assert defect.isometry_defect < 1e-8
    assert defect.cuntz_defect >= -1e-12


def test_word_power_of_empty_word_is_identity(small_free: FreeSeries) -> None:
    g = build_gns(moments_from_schur(small_free))

    assert np.allclose(g.word_power(()), np.eye(g.rank))
    assert np.allclose(g.word_power((1, 2)), g.piL[0] @ g.piL[1])


# ============================================================================
# Tests: Quasi-extremity
# ============================================================================


@pytest.mark.parametrize("N", [2, 4, 6])
def test_constant_series_gives_the_largest_indicator(N: int) -> None:
    """B = 0.5 has φ(I) = 3 and vanishing higher moments; the indicator is scaled to 1."""
    phi = moments_from_schur(FreeSeries.constant(2, 1, N, 0.5))

    assert np.allclose(phi.phi_I, 3.0)
    assert quasi_extreme_indicator(phi) == pytest.approx(1.0)
    assert quasi_extreme_indicator(phi) > 0.01


def test_indicator_does_not_increase_with_truncation() -> None:
    values = [
        quasi_extreme_indicator(moments_from_schur(FreeSeries(1, 1, N, {(): 0.3, (1,): 0.4})))
        for N in range(2, 7)
    ]

    assert all(0.0 <= v <= 1.0 for v in values)
    assert all(b <= a + 1e-9 for a, b in zip(values, values[1:], strict=False))


def test_indicator_ignores_the_scale_of_the_functional() -> None:
    phi = moments_from_schur(FreeSeries(1, 1, 3, {(): 0.3, (1,): 0.4}))
    scaled = MomentFunctional(
        phi.d, phi.m, phi.N, 4.0 * phi.phi_I, {w: 4.0 * v for w, v in phi.moments.items()}
    )

    assert quasi_extreme_indicator(scaled) == pytest.approx(quasi_extreme_indicator(phi))
