"""Tests for settings and logging configuration."""

from __future__ import annotations

import pytest
from loguru import logger
from pydantic import ValidationError

from freeclark.config import Settings, load_settings
from freeclark.logging_config import setup_logging


def test_defaults() -> None:
    settings = Settings()

    assert settings.truncation == 6
    assert settings.psd_tol == 1e-9
    assert settings.rank_tol == 1e-10
    assert settings.default_rho == 0.8
    assert settings.log_level == "ERROR"


def test_environment_overrides(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setenv("FREECLARK_PSD_TOL", "1e-6")
    monkeypatch.setenv("FREECLARK_TRUNCATION", "3")

    settings = load_settings()

    assert settings.psd_tol == 1e-6
    assert settings.truncation == 3


def test_invalid_values_are_rejected(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setenv("FREECLARK_DEFAULT_RHO", "1.2")

    with pytest.raises(ValidationError):
        Settings()


def test_setup_logging_uses_the_configured_level() -> None:
    setup_logging(Settings(log_level="debug"))
    messages: list[str] = []
    logger.add(messages.append, level="DEBUG", format="{message}")

    logger.debug("ping")

    assert any("ping" in m for m in messages)
