from __future__ import annotations

import sys

from loguru import logger

from .config import Settings, load_settings

_LOGURU_FORMAT = (
    "<green>{time:HH:mm:ss.SSS}</green> "
    "| <level>{level: <8}</level> "
    "| <cyan>{name}</cyan>:<cyan>{function}</cyan> "
    "- <level>{message}</level>"
)


def setup_logging(settings: Settings | None = None) -> None:
    """Configure the loguru sink from Settings.

    Level comes from settings.log_level, i.e. FREECLARK_LOG_LEVEL or the
    default ERROR.
    """
    s = settings or load_settings()

    try:
        logger.remove()
    except Exception:
        pass

    logger.add(
        sys.stderr,
        level=s.log_level.upper(),
        enqueue=True,
        backtrace=False,
        diagnose=False,
        format=_LOGURU_FORMAT,
    )
