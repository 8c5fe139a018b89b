"""Commands on automata: check-diamond, run, compare."""

import argparse
import logging

from tcadist.core.distribution import distribute
from tcadist.core.errors import EXIT_OK, EXIT_SEMANTIC, raise_usage_error
from tcadist.core.harness import lockstep
from tcadist.core.raa import accepts, run_word
from tcadist.core.reconfig import Action
from tcadist.core.rldfa import RlDfa, check_diamond
from tcadist.models.documents import (
    RlDfaDocument,
    Universe,
    WordDocument,
    WordsDocument,
    dump_document,
    load_document,
    read_text,
    to_rldfa,
    to_words,
)
from tcadist.models.reports import diamond_lines, lockstep_lines, lockstep_report

logger = logging.getLogger(__name__)


def _load_dfa(path: str) -> tuple[RlDfa, Universe]:
    doc = load_document(read_text(path))
    if not isinstance(doc, RlDfaDocument):
        raise_usage_error(f"{path}: expected an rldfa document, got kind {doc.kind!r}")
    return to_rldfa(doc)


def _load_words(path: str, universe: Universe) -> list[list[Action]]:
    doc = load_document(read_text(path))
    if not isinstance(doc, (WordDocument, WordsDocument)):
        raise_usage_error(f"{path}: expected a word or words document, got kind {doc.kind!r}")
    return to_words(doc, universe)


def cmd_check_diamond(args: argparse.Namespace) -> int:
    """
    Explore the reachable configurations and test every independent pair.

    Returns:
        0 when diamond closed, 1 with a counterexample otherwise
    """
    dfa, universe = _load_dfa(args.dfa)
    report = check_diamond(dfa)
    for line in diamond_lines(report, universe):
        print(line)
    return EXIT_OK if report.ok else EXIT_SEMANTIC


def cmd_run(args: argparse.Namespace) -> int:
    """Distribute the automaton and run each word on the distributed version."""
    dfa, universe = _load_dfa(args.dfa)
    words = _load_words(args.words, universe)
    raa = distribute(dfa)
    for i, word in enumerate(words):
        result = run_word(raa, word)
        if not result.defined:
            print(
                f"word={i} UNDEFINED at={result.undefined_at} "
                f"blockers={universe.process_list(result.blockers)}"
            )
            continue
        verdict = "ACCEPTED" if accepts(raa, result.last).accepted else "REJECTED"
        print(f"word={i} {verdict}")
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    """
    Run centralized and distributed automata in lockstep on every word.

    Returns:
        0 when every audit passes, 1 otherwise
    """
    dfa, universe = _load_dfa(args.dfa)
    words = _load_words(args.words, universe)
    raa = distribute(dfa, verify=not args.no_verify)
    traces = [lockstep(dfa, raa, word) for word in words]
    report = lockstep_report(traces)
    logger.info("compare: %d words, %d steps, ok=%s", report.words, report.steps, report.ok)
    if args.json:
        print(dump_document(report), end="")
    else:
        for line in lockstep_lines(report):
            print(line)
    return EXIT_OK if report.ok else EXIT_SEMANTIC


def register(commands: argparse._SubParsersAction) -> None:
    parser = commands.add_parser("check-diamond", help="check that an automaton is diamond closed")
    parser.add_argument("dfa", help="RL-DFA document")
    parser.set_defaults(handler=cmd_check_diamond)

    parser = commands.add_parser("run", help="run words on the distributed automaton")
    parser.add_argument("dfa", help="RL-DFA document")
    parser.add_argument("words", help="word or words document")
    parser.set_defaults(handler=cmd_run)

    parser = commands.add_parser("compare", help="lockstep audit of the distribution")
    parser.add_argument("dfa", help="RL-DFA document")
    parser.add_argument("words", help="word or words document")
    parser.add_argument(
        "--no-verify",
        action="store_true",
        help="skip the diamond check before distributing",
    )
    parser.set_defaults(handler=cmd_compare)
