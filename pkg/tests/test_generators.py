"""Tests for seeded random instances."""

from __future__ import annotations

import numpy as np
import pytest

from freeclark.errors import ConfigurationError
from freeclark.generators import (
    random_comm_schur,
    random_free_schur,
    random_nilpotent_point,
    random_unitary,
)
from freeclark.series import schur_norm_bounds

# ============================================================================
# Tests: Schur series
# ============================================================================


def test_free_schur_is_seeded() -> None:
    a = random_free_schur(d=2, m=2, deg=2, rho=0.5, seed=3, N=3)
    b = random_free_schur(d=2, m=2, deg=2, rho=0.5, seed=3, N=3)
    c = random_free_schur(d=2, m=2, deg=2, rho=0.5, seed=4, N=3)

    assert a.max_difference(b) == 0.0
    assert a.max_difference(c) > 0.0


def test_free_schur_has_the_requested_l1_norm() -> None:
    F = random_free_schur(d=3, m=1, deg=2, rho=0.7, seed=0, N=4)
    bounds = schur_norm_bounds(F)

    assert F.degree == 2
    assert bounds.upper == pytest.approx(0.7)
    assert bounds.lower <= bounds.upper + 1e-12
    assert bounds.certified_contractive


def test_comm_schur_has_the_requested_l1_norm() -> None:
    b = random_comm_schur(d=2, m=2, deg=3, rho=0.4, seed=1, N=4)
    total = sum(np.linalg.norm(c, 2) for c in b.coeffs.values())

    assert b.degree == 3
    assert total == pytest.approx(0.4)


@pytest.mark.parametrize("rho", [0.0, 1.0, -0.2])
def test_rho_must_lie_in_the_open_unit_interval(rho: float) -> None:
    with pytest.raises(ConfigurationError):
        random_free_schur(d=1, m=1, deg=1, rho=rho, seed=0)
    with pytest.raises(ConfigurationError):
        random_comm_schur(d=1, m=1, deg=1, rho=rho, seed=0)


def test_degree_cannot_exceed_truncation() -> None:
    with pytest.raises(ConfigurationError):
        random_free_schur(d=2, m=1, deg=5, rho=0.5, seed=0, N=4)


# ============================================================================
# Tests: Points and unitaries
# ============================================================================


@pytest.mark.parametrize("order", [2, 3, 4])
def test_nilpotent_point_has_the_requested_order(order: int) -> None:
    p = random_nilpotent_point(d=2, n=order + 1, order=order, seed=7)

    assert p.n == order + 1
    assert p.nilpotency_order() == order
    assert p.row_norm == pytest.approx(0.9)


def test_nilpotent_point_validation() -> None:
    with pytest.raises(ConfigurationError):
        random_nilpotent_point(d=2, n=3, order=0, seed=0)


def test_random_unitary() -> None:
    U = random_unitary(3, seed=2)

    assert np.allclose(U.conj().T @ U, np.eye(3))
    assert np.allclose(U, random_unitary(3, seed=2))
