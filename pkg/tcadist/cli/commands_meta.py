"""Meta commands (version)."""

import argparse
import json

from tcadist.core.errors import EXIT_OK
from tcadist.core.versioning import get_version_info
from tcadist.models.reports import VersionReport


def cmd_version(_args: argparse.Namespace) -> int:
    """
    Print version and build information.

    Returns:
        Exit code
    """
    report = VersionReport(**get_version_info())
    print(json.dumps(report.model_dump(), indent=2))
    return EXIT_OK


def register(commands: argparse._SubParsersAction) -> None:
    parser = commands.add_parser("version", help="print version information")
    parser.set_defaults(handler=cmd_version)
