"""Instance generators and the lockstep verifier for distributed automata."""

import logging
import random
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from typing import Literal

import networkx as nx
from pydantic import BaseModel, Field

from tcadist.core.config import get_settings
from tcadist.core.distribution import (
    LocalState,
    architecture_of,
    encoded_size_bits,
    global_state,
    local_state_for,
    size_bound_bits,
)
from tcadist.core.errors import AuditFailureError, TcaError, raise_usage_error
from tcadist.core.raa import GlobalState, Raa, accepts, initial_state, step
from tcadist.core.reconfig import OP_KINDS, Action, all_actions, apply, check_valid
from tcadist.core.rldfa import (
    Config,
    RlDfa,
    RunResult,
    State,
    advance,
    parent_view_of,
    run,
    view_of,
)
from tcadist.core.topology import Tca, Tree, validate_tca

logger = logging.getLogger(__name__)

Family = Literal["tracker", "parity", "custom"]

CHECKS = (
    "definedness",
    "parent-view",
    "own-view",
    "membership",
    "tree",
    "connected-channels",
    "disconnected-channels",
    "global-state",
    "acceptance",
    "size-bound",
)


class GenSpec(BaseModel):
    """Parameters of a generated instance."""

    n: int = Field(..., description="Number of processes", ge=2)
    k: int = Field(..., description="Number of channels", ge=1)
    seed: int = Field(default=0, description="Random seed")
    family: Family = Field(default="parity", description="Automaton family")
    max_len: int = Field(default=6, description="Word length bound", ge=0)
    ops: tuple[str, ...] = Field(default=OP_KINDS, description="Operation kinds in the alphabet")
    grow: float = Field(default=0.3, description="Chance of enlarging a channel", ge=0, le=1)


def gen_tca(spec: GenSpec) -> Tca:
    """
    Sample a labelled tree and repair random channel memberships into a valid TCA.

    Deterministic per ``spec.seed``.
    """
    rng = random.Random(spec.seed)
    n, k = spec.n, spec.k
    graph = nx.from_prufer_sequence([rng.randrange(n) for _ in range(n - 2)])
    root = rng.randrange(n)
    labels = list(range(1, n))
    rng.shuffle(labels)
    edges = [(u, v, lab) for (u, v), lab in zip(nx.bfs_edges(graph, root), labels)]
    tree = Tree.from_edges(n, root, edges)

    members: list[set[int]] = [set() for _ in range(k)]
    for u, v, _ in edges:
        members[rng.randrange(k)] |= {u, v}
    for c in range(k):
        if not members[c]:
            u, v, _ = rng.choice(edges)
            members[c] = {u, v}
        anchor = min(members[c])
        for p in list(members[c]):
            members[c].update(nx.shortest_path(graph, anchor, p))
        while rng.random() < spec.grow and len(members[c]) < n:
            frontier = sorted(
                p for p in range(n) if p not in members[c]
                and any(q in members[c] for q in graph.neighbors(p))
            )
            members[c].add(rng.choice(frontier))

    tca = Tca(arch=tuple(frozenset(ms) for ms in members), tree=tree)
    if not validate_tca(tca.arch, tca.tree).ok:
        raise_usage_error("generated architecture violates the TCA conditions", spec.model_dump())
    return tca


def tca_tracker(arch0: Tca, kinds: Iterable[str] | None = None) -> RlDfa:
    """Automaton whose state is the current architecture; every word of valid actions runs."""

    def delta(s: Tca, a: Action) -> Tca | None:
        return apply(s, a) if check_valid(s, a) is None else None

    return RlDfa(
        alphabet=all_actions(arch0.n, arch0.k, kinds),
        s0=arch0,
        arch0=arch0,
        delta=delta,
        is_final=lambda _s: True,
        tca_of=lambda s: s,
        name="tracker",
    )


def counter_product(
    arch0: Tca,
    moduli: Sequence[int],
    finals: Iterable[tuple[int, ...]] | None = None,
    kinds: Iterable[str] | None = None,
    name: str = "counters",
) -> RlDfa:
    """
    Tracker extended with one modular counter per channel.

    Accepting when the counters lie in ``finals`` (all zero by default).
    """
    mods = tuple(moduli)
    if len(mods) != arch0.k or any(m < 1 for m in mods):
        raise_usage_error("one positive modulus per channel expected", {"moduli": list(mods)})
    accepting = (
        frozenset(tuple(f) for f in finals) if finals is not None else frozenset({(0,) * arch0.k})
    )

    def delta(s: tuple[Tca, tuple[int, ...]], a: Action) -> tuple[Tca, tuple[int, ...]] | None:
        tca, counts = s
        if check_valid(tca, a) is not None:
            return None
        bumped = list(counts)
        bumped[a.channel] = (bumped[a.channel] + 1) % mods[a.channel]
        return apply(tca, a), tuple(bumped)

    return RlDfa(
        alphabet=all_actions(arch0.n, arch0.k, kinds),
        s0=(arch0, (0,) * arch0.k),
        arch0=arch0,
        delta=delta,
        is_final=lambda s: s[1] in accepting,
        tca_of=lambda s: s[0],
        name=name,
    )


def gen_dfa(spec: GenSpec) -> RlDfa:
    """Generated automaton of the requested family over a generated architecture."""
    arch0 = gen_tca(spec)
    if spec.family == "tracker":
        return tca_tracker(arch0, spec.ops)
    if spec.family == "parity":
        return counter_product(arch0, [2] * spec.k, kinds=spec.ops, name="parity")
    rng = random.Random(spec.seed + 1)
    moduli = [rng.choice((2, 3)) for _ in range(spec.k)]
    vectors = [()]
    for m in moduli:
        vectors = [v + (i,) for v in vectors for i in range(m)]
    finals = [v for v in vectors if rng.random() < 0.5]
    return counter_product(arch0, moduli, finals, kinds=spec.ops, name="custom")


@dataclass(frozen=True)
class WordCase:
    word: tuple[Action, ...]
    undefined_at: int | None = None


class _TooWide(Exception):
    pass


def _failing(dfa: RlDfa, config: Config) -> list[Action]:
    return [a for a in dfa.alphabet if advance(dfa, config, a)[0] is None]


def gen_words(
    dfa: RlDfa,
    max_len: int,
    seed: int = 0,
    samples: int = 200,
    undefined_ratio: float = 0.0,
    width: int | None = None,
) -> list[WordCase]:
    """
    Words with defined runs, exhaustive up to ``width`` words and sampled beyond.

    With ``undefined_ratio`` > 0 some defined words are extended by one failing letter.
    """
    rng = random.Random(seed)
    cutoff = width if width is not None else get_settings().word_width
    start = Config(dfa.s0, dfa.arch0)
    found: list[tuple[tuple[Action, ...], Config]] = []

    def explore(word: tuple[Action, ...], config: Config) -> None:
        found.append((word, config))
        if len(found) > cutoff:
            raise _TooWide
        if len(word) == max_len:
            return
        for a in dfa.alphabet:
            nxt, _, _ = advance(dfa, config, a)
            if nxt is not None:
                explore(word + (a,), nxt)

    try:
        explore((), start)
    except _TooWide:
        logger.debug("%s: more than %d words, sampling instead", dfa.name, cutoff)
        found = []
        for _ in range(samples):
            word: tuple[Action, ...] = ()
            config = start
            for _ in range(rng.randint(0, max_len)):
                options = [
                    (a, nxt) for a in dfa.alphabet
                    if (nxt := advance(dfa, config, a)[0]) is not None
                ]
                if not options:
                    break
                a, config = rng.choice(options)
                word += (a,)
            found.append((word, config))

    cases = [WordCase(word) for word, _ in found]
    if undefined_ratio > 0:
        for word, config in found:
            if len(word) < max_len and rng.random() < undefined_ratio:
                bad = _failing(dfa, config)
                if bad:
                    cases.append(WordCase(word + (rng.choice(bad),), undefined_at=len(word)))
    return cases


@dataclass(frozen=True)
class StepAudit:
    """Audit of one prefix: named checks and the diagnostics of failed ones."""

    index: int
    action: Action | None
    checks: tuple[tuple[str, bool], ...]
    diagnostics: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return all(passed for _, passed in self.checks)

    def failed(self) -> list[str]:
        return [name for name, passed in self.checks if not passed]


@dataclass(frozen=True)
class LockstepTrace:
    word: tuple[Action, ...]
    central: RunResult
    states: tuple[GlobalState, ...]
    data: tuple[object, ...]
    audits: tuple[StepAudit, ...]

    @property
    def ok(self) -> bool:
        return all(audit.ok for audit in self.audits)

    def first_failure(self) -> StepAudit | None:
        return next((audit for audit in self.audits if not audit.ok), None)


def _prefix(result: RunResult, m: int) -> RunResult:
    return RunResult(result.configs[: m + 1], result.word[:m])


def _state_index(central: RunResult, states: Sequence[GlobalState]) -> dict[State, int]:
    """Index of the automaton states met by the run and held in local views."""
    index: dict[State, int] = {}
    for config in central.configs:
        index.setdefault(config.state, len(index))
    for g in states:
        for ls in g:
            index.setdefault(ls.s1, len(index))
            index.setdefault(ls.s2, len(index))
    return index


def _audit(
    dfa: RlDfa,
    raa: Raa,
    central: RunResult,
    m: int,
    g: Sequence[LocalState],
    state_bits: int,
    state_index: Mapping[State, int],
) -> StepAudit:
    prefix = _prefix(central, m)
    config = prefix.last
    tca = config.tca
    n, k = tca.n, tca.k
    notes: list[str] = []
    results: dict[str, bool] = {name: True for name in CHECKS}

    def fail(name: str, note: str) -> None:
        results[name] = False
        notes.append(f"{name}: {note}")

    for p, ls in enumerate(g):
        try:
            expected_own = view_of(dfa, prefix, m, {p})
        except TcaError as exc:
            fail("own-view", f"prefix {m}: process {p}: {exc.message}")
        else:
            if ls.s2 != expected_own:
                fail("own-view", f"process {p} holds {ls.s2!r}, view is {expected_own!r}")
        try:
            expected_parent = parent_view_of(dfa, prefix, p)
        except TcaError as exc:
            fail("parent-view", f"prefix {m}: process {p}: {exc.message}")
        else:
            if ls.s1 != expected_parent:
                fail(
                    "parent-view",
                    f"process {p} holds {ls.s1!r}, parent view is {expected_parent!r}",
                )
        expected = local_state_for(tca, p, ls.s1, ls.s2)
        if ls.cc != expected.cc:
            fail("connected-channels", f"process {p}: {ls.cc!r} != {expected.cc!r}")
        if ls.dc != expected.dc:
            fail("disconnected-channels", f"process {p}: {ls.dc!r} != {expected.dc!r}")
        size = encoded_size_bits(ls, n, k, state_bits, state_index)
        if size > size_bound_bits(n, k, state_bits):
            fail("size-bound", f"process {p} takes {size} bits")

    try:
        collected = architecture_of(g, k)
    except TcaError as exc:
        fail("tree", exc.message)
        collected = None
    if collected is not None:
        if collected.arch != tca.arch:
            fail("membership", f"{collected.arch!r} != {tca.arch!r}")
        if collected.tree != tca.tree:
            fail("tree", "neighbourhoods describe another tree")

    try:
        recovered = global_state(dfa, g, k)
    except TcaError as exc:
        fail("global-state", f"prefix {m}: {exc.code}: {exc.message}")
    else:
        if recovered != config.state:
            fail("global-state", f"recovered {recovered!r}, expected {config.state!r}")
    try:
        distributed_accepts = accepts(raa, tuple(g)).accepted
    except TcaError as exc:
        fail("acceptance", f"prefix {m}: {exc.code}: {exc.message}")
    else:
        if distributed_accepts != dfa.is_final(config.state):
            fail("acceptance", f"distributed acceptance is {distributed_accepts}")

    action = central.word[m - 1] if m else None
    return StepAudit(m, action, tuple(results.items()), tuple(notes))


def lockstep(
    dfa: RlDfa,
    raa: Raa,
    word: Sequence[Action],
    state_bits: int | None = None,
    strict: bool = False,
) -> LockstepTrace:
    """
    Run the centralized and the distributed automaton side by side, auditing every prefix.

    Raises:
        AuditFailureError: If ``strict`` and some check fails
    """
    central = run(dfa, word)
    g = initial_state(raa)
    states = [g]
    used: list[object] = []
    stopped: StepAudit | None = None
    for i, a in enumerate(word):
        central_defined = central.undefined_at is None or central.undefined_at > i
        try:
            d = raa.propose_data(g, a)
            moved = step(raa, g, d, a)
        except TcaError as exc:
            logger.debug("lockstep: distributed step %d undefined: %s", i, exc.message)
            moved = None
        if moved is None or not central_defined:
            agree = (moved is None) == (not central_defined)
            checks = tuple((name, name != "definedness" or agree) for name in CHECKS)
            notes = () if agree else (
                f"definedness: centralized {'defined' if central_defined else 'undefined'}, "
                f"distributed {'undefined' if moved is None else 'defined'}",
            )
            stopped = StepAudit(i + 1, a, checks, notes)
            break
        g = moved
        states.append(g)
        used.append(d)

    state_index = _state_index(central, states)
    if state_bits is None:
        state_bits = max(1, (len(state_index) - 1).bit_length())
    audits = [
        _audit(dfa, raa, central, m, g, state_bits, state_index) for m, g in enumerate(states)
    ]
    if stopped is not None:
        audits.append(stopped)

    trace = LockstepTrace(tuple(word), central, tuple(states), tuple(used), tuple(audits))
    failure = trace.first_failure()
    if strict and failure is not None:
        raise AuditFailureError(
            f"check failed after {failure.index} actions: {', '.join(failure.failed())}",
            {"index": failure.index, "diagnostics": list(failure.diagnostics)},
        )
    return trace
