"""Version and build information."""

import os
from typing import Any

from tcadist import __version__

FORMAT_VERSION = 1


def get_version_info() -> dict[str, Any]:
    """
    Get version and build information.

    Returns:
        Dictionary with package version, file-format version and build metadata
    """
    return {
        "package": "tca-distribution",
        "version": __version__,
        "format_version": FORMAT_VERSION,
        "git_commit": os.getenv("GIT_COMMIT", "unknown"),
        "build_tag": os.getenv("BUILD_TAG", "dev"),
    }


def get_build_label() -> str:
    """Short ``<version>@<tag-or-commit>`` label for report headers."""
    build_tag = os.getenv("BUILD_TAG", "dev")
    git_commit = os.getenv("GIT_COMMIT", "unknown")

    # Use tag if available, otherwise commit
    build = build_tag if build_tag != "dev" else git_commit
    return f"{__version__}@{build}"
