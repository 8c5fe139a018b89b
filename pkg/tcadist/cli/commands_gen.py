"""Seeded instance generation."""

import argparse

from pydantic import ValidationError

from tcadist.core.errors import EXIT_OK, raise_usage_error
from tcadist.core.harness import GenSpec, gen_dfa, gen_tca, gen_words
from tcadist.core.reconfig import OP_KINDS
from tcadist.core.rldfa import materialize
from tcadist.models.documents import (
    default_universe,
    dump_document,
    from_table_doc,
    from_tca,
    from_words,
)


def _spec(args: argparse.Namespace) -> GenSpec:
    ops = tuple(op.strip() for op in args.ops.split(",") if op.strip())
    unknown = sorted(set(ops) - set(OP_KINDS))
    if unknown:
        raise_usage_error(f"unknown operation kinds: {', '.join(unknown)}")
    try:
        return GenSpec(
            n=args.n, k=args.k, seed=args.seed, family=args.family, max_len=args.max_len, ops=ops
        )
    except ValidationError as exc:
        first = exc.errors()[0]
        flag = str(first["loc"][0]).replace("_", "-")
        raise_usage_error(f"--{flag}: {first['msg']}")


def cmd_gen(args: argparse.Namespace) -> int:
    """
    Print a generated TCA, automaton or word suite; same flags give the same output.

    Returns:
        Exit code
    """
    spec = _spec(args)
    universe = default_universe(spec.n, spec.k)
    if args.what == "tca":
        doc = from_tca(gen_tca(spec), universe)
    else:
        dfa = gen_dfa(spec)
        if args.what == "dfa":
            doc = from_table_doc(materialize(dfa), dfa.arch0, universe)
        else:
            cases = gen_words(
                dfa, spec.max_len, seed=spec.seed, undefined_ratio=args.undefined_ratio
            )
            doc = from_words([list(case.word) for case in cases], universe)
    print(dump_document(doc), end="")
    return EXIT_OK


def register(commands: argparse._SubParsersAction) -> None:
    parser = commands.add_parser("gen", help="generate a seeded instance")
    parser.add_argument("--what", choices=("tca", "dfa", "words"), default="tca")
    parser.add_argument("--n", type=int, default=4, help="number of processes")
    parser.add_argument("--k", type=int, default=2, help="number of channels")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument(
        "--family", choices=("tracker", "parity", "custom"), default="parity"
    )
    parser.add_argument("--max-len", type=int, default=4, help="word length bound")
    parser.add_argument(
        "--ops",
        default=",".join(OP_KINDS),
        help="comma-separated operation kinds (default: all)",
    )
    parser.add_argument(
        "--undefined-ratio",
        type=float,
        default=0.0,
        help="share of words extended by an undefined action",
    )
    parser.set_defaults(handler=cmd_gen)
