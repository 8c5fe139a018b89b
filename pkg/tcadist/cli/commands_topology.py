"""Commands on architectures: validate, apply, plan."""

import argparse
import logging

from tcadist.core.errors import EXIT_OK, EXIT_SEMANTIC, raise_usage_error
from tcadist.core.reconfig import apply, plan
from tcadist.core.topology import Tca, validate_tca
from tcadist.models.documents import (
    TcaDocument,
    Universe,
    dump_document,
    from_tca,
    from_word,
    load_kind,
    parse_action,
    to_tca,
)
from tcadist.models.reports import validation_lines

logger = logging.getLogger(__name__)


def _load_valid(path: str) -> tuple[Tca, Universe] | None:
    tca, universe = to_tca(load_kind(path, TcaDocument))
    report = validate_tca(tca.arch, tca.tree)
    if not report.ok:
        for line in validation_lines(report, universe):
            print(line)
        return None
    return tca, universe


def cmd_validate(args: argparse.Namespace) -> int:
    """
    Check the TCA conditions of a file, one violation per line.

    Returns:
        0 when valid, 1 otherwise
    """
    tca, universe = to_tca(load_kind(args.path, TcaDocument))
    report = validate_tca(tca.arch, tca.tree)
    for line in validation_lines(report, universe):
        print(line)
    return EXIT_OK if report.ok else EXIT_SEMANTIC


def cmd_apply(args: argparse.Namespace) -> int:
    """Apply actions in order and print the resulting TCA document."""
    loaded = _load_valid(args.path)
    if loaded is None:
        return EXIT_SEMANTIC
    tca, universe = loaded
    for text in args.actions:
        tca = apply(tca, parse_action(text, universe))
    print(dump_document(from_tca(tca, universe)), end="")
    return EXIT_OK


def cmd_plan(args: argparse.Namespace) -> int:
    """Print a word of actions turning one TCA into another."""
    source = _load_valid(args.source)
    target = _load_valid(args.target)
    if source is None or target is None:
        return EXIT_SEMANTIC
    if source[1] != target[1]:
        raise_usage_error("plan endpoints must declare the same processes and channels")
    word = plan(source[0], target[0])
    logger.info("plan: %d actions", len(word))
    print(dump_document(from_word(word, source[1])), end="")
    return EXIT_OK


def register(commands: argparse._SubParsersAction) -> None:
    parser = commands.add_parser("validate", help="check the TCA conditions")
    parser.add_argument("path", help="TCA document")
    parser.set_defaults(handler=cmd_validate)

    parser = commands.add_parser("apply", help="apply actions to a TCA")
    parser.add_argument("path", help="TCA document")
    parser.add_argument("actions", nargs="+", help='actions such as "c1 disc 2"')
    parser.set_defaults(handler=cmd_apply)

    parser = commands.add_parser("plan", help="reconfiguration plan between two TCAs")
    parser.add_argument("source", help="TCA document to start from")
    parser.add_argument("target", help="TCA document to reach")
    parser.set_defaults(handler=cmd_plan)
