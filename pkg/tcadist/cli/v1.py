"""Command-line parser aggregating all command groups."""

import argparse

from tcadist import __version__
from tcadist.cli import commands_automata, commands_gen, commands_meta, commands_topology

COMMAND_GROUPS = (commands_meta, commands_topology, commands_automata, commands_gen)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tcadist",
        description="Tree-like communication architectures and distributed reconfigurable automata",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=None, help="override TCADIST_LOG_LEVEL")
    parser.add_argument(
        "--json", action="store_true", help="machine-readable reports and error payloads"
    )
    commands = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for group in COMMAND_GROUPS:
        group.register(commands)
    return parser
