"""
Seeded random instances: Schur series, nilpotent NC points and unitaries.

Series are rescaled to ℓ¹ coefficient norm rho < 1, which certifies them as
non-unital Schur multipliers without any further check.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigurationError
from .freecore import enumerate_multi_indices, enumerate_words
from .series import CommSeries, FreeSeries, NCPoint

DEFAULT_TRUNCATION = 6


def _check_rho(rho: float) -> None:
    if not 0.0 < rho < 1.0:
        raise ConfigurationError(f"rho must lie in (0, 1), got {rho}")


def _gaussian(rng: np.random.Generator, m: int) -> np.ndarray:
    return rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))


def _l1_rescale(coeffs: dict, rho: float) -> dict:  # type: ignore[type-arg]
    total = sum(float(np.linalg.norm(c, 2)) for c in coeffs.values())
    if total == 0.0:
        return coeffs
    return {k: c * (rho / total) for k, c in coeffs.items()}


def random_free_schur(
    d: int, m: int, deg: int, rho: float, seed: int, N: int = DEFAULT_TRUNCATION
) -> FreeSeries:
    _check_rho(rho)
    if deg > N:
        raise ConfigurationError(f"Degree {deg} exceeds truncation N={N}")
    rng = np.random.default_rng(seed)
    coeffs = {w: _gaussian(rng, m) for w in enumerate_words(d, deg)}
    return FreeSeries(d, m, N, _l1_rescale(coeffs, rho))


def random_comm_schur(
    d: int, m: int, deg: int, rho: float, seed: int, N: int = DEFAULT_TRUNCATION
) -> CommSeries:
    """Monomials have multiplier norm one on Drury-Arveson space, so ℓ¹ ≤ rho certifies."""
    _check_rho(rho)
    if deg > N:
        raise ConfigurationError(f"Degree {deg} exceeds truncation N={N}")
    rng = np.random.default_rng(seed)
    coeffs = {n: _gaussian(rng, m) for n in enumerate_multi_indices(d, deg)}
    return CommSeries(d, m, N, _l1_rescale(coeffs, rho))


def random_nilpotent_point(
    d: int, n: int, order: int, seed: int, scale: float = 0.9
) -> NCPoint:
    """Layered strictly upper-triangular matrices; every word of length ≥ order vanishes."""
    if order < 1 or n < 1:
        raise ConfigurationError("Nilpotent points need n ≥ 1 and order ≥ 1")
    rng = np.random.default_rng(seed)
    levels = np.arange(n) * min(order, n) // n
    mask = (levels[None, :] == levels[:, None] + 1).astype(float)
    Z = [mask * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) for _ in range(d)]
    norm = float(np.linalg.norm(np.hstack(Z), 2))
    if norm > 0.0:
        Z = [z * (scale / norm) for z in Z]
    return NCPoint(tuple(Z))


def random_unitary(m: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    Q, R = np.linalg.qr(_gaussian(rng, m))
    phases = np.diag(R) / np.abs(np.diag(R))
    return Q * phases[None, :]
