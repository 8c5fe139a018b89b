"""Tests for settings, version info and error payloads."""

import pytest

from tcadist import __version__
from tcadist.core.config import get_settings
from tcadist.core.errors import (
    EXIT_SEMANTIC,
    EXIT_USAGE,
    BlockedError,
    ChannelDeadError,
    ParseError,
    StepError,
    TcaError,
    raise_parse_error,
)
from tcadist.core.versioning import get_build_label, get_version_info


def test_default_settings(monkeypatch):
    """Test defaults without environment overrides."""
    for name in ("LOG_LEVEL", "MAX_CONFIGS", "DIAM_CACHE", "WORD_WIDTH"):
        monkeypatch.delenv(f"TCADIST_{name}", raising=False)
    settings = get_settings()
    assert settings.log_level == "WARNING"
    assert settings.max_configs == 200_000
    assert settings.diam_cache is True
    assert settings.word_width == 4096


def test_settings_from_environment(monkeypatch):
    """Test that TCADIST_* variables are read."""
    monkeypatch.setenv("TCADIST_LOG_LEVEL", "debug")
    monkeypatch.setenv("TCADIST_MAX_CONFIGS", "50")
    monkeypatch.setenv("TCADIST_DIAM_CACHE", "false")
    settings = get_settings()
    assert settings.log_level == "DEBUG"
    assert settings.max_configs == 50
    assert settings.diam_cache is False


def test_settings_reject_nonpositive_bound(monkeypatch):
    """Test that exploration bounds are positive."""
    monkeypatch.setenv("TCADIST_MAX_CONFIGS", "0")
    with pytest.raises(ValueError):
        get_settings()


def test_version_info(monkeypatch):
    """Test version information and the build label."""
    monkeypatch.delenv("BUILD_TAG", raising=False)
    monkeypatch.setenv("GIT_COMMIT", "abc123")
    info = get_version_info()
    assert info["version"] == __version__
    assert info["git_commit"] == "abc123"
    assert get_build_label() == f"{__version__}@abc123"

    monkeypatch.setenv("BUILD_TAG", "v0.1.0")
    assert get_build_label() == f"{__version__}@v0.1.0"


def test_error_payload():
    """Test the structured error payload."""
    with pytest.raises(ParseError) as exc:
        raise_parse_error("invalid JSON: Expecting value", line=3, column=7)
    payload = exc.value.to_payload()
    assert payload["error"]["code"] == "parse_error"
    assert payload["error"]["details"] == {"line": 3, "column": 7}
    assert exc.value.exit_code == EXIT_USAGE


def test_step_errors_share_a_base():
    """Test the error hierarchy of distributed steps."""
    assert issubclass(BlockedError, StepError)
    assert issubclass(ChannelDeadError, StepError)
    assert ChannelDeadError("dead").code == "channel_dead"
    assert TcaError("x").exit_code == EXIT_SEMANTIC
