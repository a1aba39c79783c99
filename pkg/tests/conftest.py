import sys
from pathlib import Path

import numpy as np
import pytest

# Ensure src/ is on sys.path for tests without installation
PROJECT_ROOT = Path(__file__).resolve().parents[1]
SRC_PATH = PROJECT_ROOT / "src"
if SRC_PATH.exists():
    sys.path.insert(0, str(SRC_PATH))

from freeclark.commutative import build_herglotz_space, build_Vb, comm_moments  # noqa: E402
from freeclark.generators import random_comm_schur, random_free_schur  # noqa: E402
from freeclark.series import CommSeries, FreeSeries  # noqa: E402


@pytest.fixture(autouse=True)
def disable_loguru():
    """Disable loguru logging during tests to prevent pytest capture issues."""
    import loguru

    # Remove all handlers and disable logging
    loguru.logger.remove()
    # Add a null handler to prevent any logging
    loguru.logger.add(lambda x: None, level="CRITICAL", enqueue=False)
    yield
    # Clean up after test
    loguru.logger.remove()


@pytest.fixture(autouse=True)
def isolated_env(monkeypatch: pytest.MonkeyPatch) -> None:
    """Keep developer FREECLARK_* variables out of the settings under test."""
    import os

    for key in list(os.environ):
        if key.startswith("FREECLARK_"):
            monkeypatch.delenv(key, raising=False)


# ============================================================================
# Reusable instances
# ============================================================================


@pytest.fixture
def small_free() -> FreeSeries:
    """Degree-2 scalar series in two variables, N = 4."""
    return random_free_schur(d=2, m=1, deg=2, rho=0.7, seed=11, N=4)


@pytest.fixture
def small_free_matrix() -> FreeSeries:
    """Degree-1 2×2 matrix series in two variables, N = 3."""
    return random_free_schur(d=2, m=2, deg=1, rho=0.6, seed=5, N=3)


@pytest.fixture
def small_comm() -> CommSeries:
    return random_comm_schur(d=2, m=1, deg=2, rho=0.7, seed=3, N=4)


@pytest.fixture
def tight_extension(small_comm: CommSeries):  # type: ignore[no-untyped-def]
    space = build_herglotz_space(comm_moments(small_comm), small_comm)
    return build_Vb(space)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)
