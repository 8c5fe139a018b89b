"""Environment-driven settings and logging setup."""

import logging
import os

from pydantic import BaseModel, Field

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

_logging_configured = False


class Settings(BaseModel):
    """Runtime settings read from ``TCADIST_*`` environment variables."""

    log_level: str = Field(default="WARNING", description="Root log level for tcadist")
    max_configs: int = Field(
        default=200_000, description="Bound on reachable-configuration exploration", gt=0
    )
    diam_cache: bool = Field(default=True, description="Memoize diam results")
    word_width: int = Field(
        default=4096, description="Exhaustive word enumeration cutoff", gt=0
    )


def get_settings() -> Settings:
    """
    Read settings from the environment.

    Returns:
        Settings populated from ``TCADIST_LOG_LEVEL``, ``TCADIST_MAX_CONFIGS``,
        ``TCADIST_DIAM_CACHE`` and ``TCADIST_WORD_WIDTH``
    """
    return Settings(
        log_level=os.getenv("TCADIST_LOG_LEVEL", "WARNING").upper(),
        max_configs=int(os.getenv("TCADIST_MAX_CONFIGS", "200000")),
        diam_cache=os.getenv("TCADIST_DIAM_CACHE", "1") not in ("0", "false", "no"),
        word_width=int(os.getenv("TCADIST_WORD_WIDTH", "4096")),
    )


def configure_logging(level: str | None = None) -> None:
    """
    Install the package log handler.

    Only the first call installs a handler; later calls just adjust the level.
    """
    global _logging_configured
    logger = logging.getLogger("tcadist")
    logger.setLevel(level or get_settings().log_level)
    if _logging_configured:
        return
    handler = logging.StreamHandler()
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    logger.addHandler(handler)
    _logging_configured = True
