"""Centralized RL-DFA semantics: runs, independence, diamond closure, views and diam."""

import logging
import threading
from collections import deque
from collections.abc import Callable, Hashable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any

from tcadist.core.config import get_settings
from tcadist.core.errors import (
    DiamondViolationError,
    ExplorationLimitError,
    raise_invalid_operation,
    raise_not_realizable,
    raise_usage_error,
)
from tcadist.core.reconfig import Action, all_actions, apply, check_valid
from tcadist.core.topology import Tca, proc_from_label

logger = logging.getLogger(__name__)

State = Hashable

MISSING_TRANSITION = "missing-transition"
INVALID_OPERATION = "invalid-operation"


@dataclass(frozen=True)
class RlDfa:
    """
    Deterministic automaton over reconfiguration actions.

    The state space is intensional: ``delta`` is a partial step function returning
    ``None`` where undefined. ``tca_of`` is set when every state determines the
    architecture it is reached with.
    """

    alphabet: tuple[Action, ...]
    s0: State
    arch0: Tca
    delta: Callable[[State, Action], State | None]
    is_final: Callable[[State], bool]
    tca_of: Callable[[State], Tca] | None = None
    name: str = "rldfa"
    diam_memo: dict[Any, State] = field(default_factory=dict, compare=False, repr=False)
    memo_lock: threading.Lock = field(default_factory=threading.Lock, compare=False, repr=False)


@dataclass(frozen=True)
class Config:
    state: State
    tca: Tca


@dataclass(frozen=True)
class RunResult:
    """Configurations visited by a run; ``undefined_at`` marks the failing position."""

    configs: tuple[Config, ...]
    word: tuple[Action, ...]
    undefined_at: int | None = None
    cause: str | None = None
    reason: str | None = None

    @property
    def defined(self) -> bool:
        return self.undefined_at is None

    @property
    def last(self) -> Config:
        return self.configs[-1]


@dataclass(frozen=True)
class TransitionTable:
    states: tuple[State, ...]
    s0: State
    finals: frozenset[State]
    transitions: tuple[tuple[State, Action, State], ...]


@dataclass(frozen=True)
class DiamondCounterexample:
    config: Config
    first: Action
    second: Action
    forward: State | None
    backward: State | None


@dataclass(frozen=True)
class DiamondReport:
    explored: int
    counterexample: DiamondCounterexample | None = None

    @property
    def ok(self) -> bool:
        return self.counterexample is None


@dataclass(frozen=True)
class LabeledNode:
    """Node of a labelled subtree: parent edge, state pair and subtree channel set."""

    pedge: int
    s1: State
    s2: State
    channels: frozenset[int] = frozenset()
    children: tuple["LabeledNode", ...] = ()


def from_table(
    arch0: Tca,
    s0: State,
    transitions: Mapping[tuple[State, Action], State],
    finals: Iterable[State],
    alphabet: Sequence[Action] | None = None,
    name: str = "table",
) -> RlDfa:
    """Wrap an explicit transition table; absent entries are undefined."""
    table = dict(transitions)
    accepting = frozenset(finals)
    return RlDfa(
        alphabet=tuple(alphabet) if alphabet is not None else all_actions(arch0.n, arch0.k),
        s0=s0,
        arch0=arch0,
        delta=lambda s, a: table.get((s, a)),
        is_final=accepting.__contains__,
        name=name,
    )


def advance(dfa: RlDfa, config: Config, a: Action) -> tuple[Config | None, str | None, str | None]:
    """One step of the run: ``(next config, cause, reason)``."""
    reason = check_valid(config.tca, a)
    if reason is not None:
        return None, INVALID_OPERATION, reason
    state = dfa.delta(config.state, a)
    if state is None:
        return None, MISSING_TRANSITION, "no transition for the action"
    return Config(state, apply(config.tca, a)), None, None


def run(dfa: RlDfa, word: Sequence[Action], start: Config | None = None) -> RunResult:
    """
    Run the automaton on a word.

    Args:
        dfa: Automaton
        word: Actions to read
        start: Configuration to start from (defaults to ``(s0, arch0)``)

    Returns:
        Run result; stops at the first invalid operation or missing transition
    """
    config = start if start is not None else Config(dfa.s0, dfa.arch0)
    configs = [config]
    for i, a in enumerate(word):
        nxt, cause, reason = advance(dfa, config, a)
        if nxt is None:
            return RunResult(tuple(configs), tuple(word), undefined_at=i, cause=cause, reason=reason)
        config = nxt
        configs.append(config)
    return RunResult(tuple(configs), tuple(word))


def accepts(dfa: RlDfa, word: Sequence[Action]) -> bool:
    result = run(dfa, word)
    return result.defined and dfa.is_final(result.last.state)


def _limit(limit: int | None) -> int:
    return limit if limit is not None else get_settings().max_configs


def reachable(dfa: RlDfa, limit: int | None = None) -> list[Config]:
    """
    Breadth-first list of reachable configurations.

    Raises:
        ExplorationLimitError: If more than ``limit`` configurations are found
    """
    bound = _limit(limit)
    start = Config(dfa.s0, dfa.arch0)
    seen = {start}
    order = [start]
    queue = deque([start])
    while queue:
        config = queue.popleft()
        for a in dfa.alphabet:
            nxt, _, _ = advance(dfa, config, a)
            if nxt is None or nxt in seen:
                continue
            if len(seen) >= bound:
                raise ExplorationLimitError(
                    "reachable configuration bound exceeded", {"limit": bound}
                )
            seen.add(nxt)
            order.append(nxt)
            queue.append(nxt)
    logger.debug("%s: %d reachable configurations", dfa.name, len(order))
    return order


def materialize(dfa: RlDfa, limit: int | None = None) -> TransitionTable:
    """Explicit transition table over the reachable part of ``dfa``."""
    configs = reachable(dfa, limit)
    states: list[State] = []
    seen_states: set[State] = set()
    triples: set[tuple[State, Action, State]] = set()
    for config in configs:
        if config.state not in seen_states:
            seen_states.add(config.state)
            states.append(config.state)
        for a in dfa.alphabet:
            nxt, _, _ = advance(dfa, config, a)
            if nxt is not None:
                triples.add((config.state, a, nxt.state))
    index = {s: i for i, s in enumerate(states)}
    ordered = sorted(
        triples, key=lambda t: (index[t[0]], dfa.alphabet.index(t[1]), index[t[2]])
    )
    return TransitionTable(
        states=tuple(states),
        s0=dfa.s0,
        finals=frozenset(s for s in states if dfa.is_final(s)),
        transitions=tuple(ordered),
    )


def _listeners(tca: Tca, a: Action) -> frozenset[int]:
    return tca.arch[a.channel] | apply(tca, a).arch[a.channel]


def independent(tca: Tca, a1: Action, a2: Action) -> bool:
    """
    Whether no process listens to both channels, before or after either action.

    Raises:
        InvalidOperationError: If one of the actions is not possible from ``tca``
    """
    for a in (a1, a2):
        reason = check_valid(tca, a)
        if reason is not None:
            raise_invalid_operation(reason, {"channel": a.channel, "op": a.kind})
    return _listeners(tca, a1).isdisjoint(_listeners(tca, a2))


def split_independent(tca: Tca, a1: Action, a2: Action) -> bool:
    """Whether some tree edge separates the listeners of the two actions."""
    first = _listeners(tca, a1)
    second = _listeners(tca, a2)
    everyone = frozenset(range(tca.n))
    for f in range(1, tca.n):
        below = tca.tree.subtree(proc_from_label(tca.tree, f))
        above = everyone - below
        if (first <= below and second <= above) or (first <= above and second <= below):
            return True
    return False


def words_independent(tca: Tca, w1: Sequence[Action], w2: Sequence[Action]) -> bool:
    """Recursive independence of two words from ``tca``; invalid letters make them dependent."""
    first, second = tuple(w1), tuple(w2)

    @lru_cache(maxsize=None)
    def check(arch: Tca, i: int, j: int) -> bool:
        if i == len(first) or j == len(second):
            return True
        a, b = first[i], second[j]
        if check_valid(arch, a) is not None or check_valid(arch, b) is not None:
            return False
        return (
            independent(arch, a, b)
            and check(apply(arch, a), i + 1, j)
            and check(apply(arch, b), i, j + 1)
        )

    return check(tca, 0, 0)


def _outcome(dfa: RlDfa, config: Config, word: Sequence[Action]) -> State | None:
    result = run(dfa, word, start=config)
    return result.last.state if result.defined else None


def check_diamond(dfa: RlDfa, limit: int | None = None) -> DiamondReport:
    """
    Check that independent actions commute from every reachable configuration.

    Definedness must agree as well as the reached state.
    """
    configs = reachable(dfa, limit)
    for config in configs:
        possible = [a for a in dfa.alphabet if check_valid(config.tca, a) is None]
        for i, a1 in enumerate(possible):
            for a2 in possible[i + 1:]:
                if not independent(config.tca, a1, a2):
                    continue
                forward = _outcome(dfa, config, (a1, a2))
                backward = _outcome(dfa, config, (a2, a1))
                if forward != backward:
                    logger.debug("%s: diamond fails at %s", dfa.name, config.state)
                    return DiamondReport(
                        explored=len(configs),
                        counterexample=DiamondCounterexample(
                            config, a1, a2, forward, backward
                        ),
                    )
    return DiamondReport(explored=len(configs))


def _defined_run(dfa: RlDfa, word: Sequence[Action]) -> RunResult:
    result = run(dfa, word)
    if not result.defined:
        raise_invalid_operation(
            "run is undefined",
            {"index": result.undefined_at, "cause": result.cause, "reason": result.reason},
        )
    return result


def view_steps(result: RunResult, length: int, processes: Iterable[int]) -> list[int]:
    """Positions of the prefix of length ``length`` that the process set depends on."""
    group = set(processes)
    steps = []
    for i in range(length - 1, -1, -1):
        members = result.configs[i].tca.arch[result.word[i].channel]
        if not group.isdisjoint(members):
            group |= members
            steps.append(i)
    steps.reverse()
    return steps


def view_of(dfa: RlDfa, result: RunResult, length: int, processes: Iterable[int]) -> State:
    steps = view_steps(result, length, processes)
    projected = run(dfa, [result.word[i] for i in steps])
    if not projected.defined:
        raise DiamondViolationError(
            "view is undefined on the projected word", {"steps": steps}
        )
    return projected.last.state


def view(dfa: RlDfa, word: Sequence[Action], processes: Iterable[int]) -> State:
    """
    Most recent state the given processes can deduce from their communications.

    Raises:
        InvalidOperationError: If the run on ``word`` is undefined
    """
    result = _defined_run(dfa, word)
    return view_of(dfa, result, len(result.word), processes)


def parent_edge_step(result: RunResult, p: int) -> int | None:
    """Last position where both endpoints of ``p``'s final parent edge listened."""
    final_tree = result.last.tca.tree
    if p == final_tree.root:
        return None
    f = final_tree.label[p]
    for i in range(len(result.word) - 1, -1, -1):
        tca = result.configs[i].tca
        child = proc_from_label(tca.tree, f)
        members = tca.arch[result.word[i].channel]
        if child in members and tca.tree.parent[child] in members:
            return i
    return None


def parent_view(dfa: RlDfa, word: Sequence[Action], p: int) -> State:
    """
    View shared by ``p`` and its parent at their last common communication.

    Taken along the label of ``p``'s parent edge in the final tree; ``s0`` for the
    root and when the edge never carried a communication.
    """
    result = _defined_run(dfa, word)
    return parent_view_of(dfa, result, p)


def parent_view_of(dfa: RlDfa, result: RunResult, p: int) -> State:
    i = parent_edge_step(result, p)
    if i is None:
        return dfa.s0
    tca = result.configs[i].tca
    child = proc_from_label(tca.tree, result.last.tca.tree.label[p])
    return view_of(dfa, result, i + 1, {child, tca.tree.parent[child]})


def _side_contained(before: Tca, after: Tca, a: Action, side: frozenset[int]) -> bool:
    # only the letter's own channel; a joined channel may straddle the split
    return before.arch[a.channel] <= side and after.arch[a.channel] <= side


def _side_word(
    dfa: RlDfa,
    start: Config,
    side: frozenset[int],
    goal: State,
    channels: frozenset[int] | None,
    bound: int,
) -> tuple[tuple[Action, ...], Config] | None:
    if start.state == goal:
        return (), start
    letters = [a for a in dfa.alphabet if channels is None or a.channel in channels]
    parents: dict[Config, tuple[Config, Action] | None] = {start: None}
    queue = deque([start])
    while queue:
        config = queue.popleft()
        for a in letters:
            nxt, _, _ = advance(dfa, config, a)
            if nxt is None or nxt in parents:
                continue
            if not _side_contained(config.tca, nxt.tca, a, side):
                continue
            if len(parents) >= bound:
                raise ExplorationLimitError("diam search bound exceeded", {"limit": bound})
            parents[nxt] = (config, a)
            if nxt.state == goal:
                word = []
                cursor = nxt
                while parents[cursor] is not None:
                    prev, letter = parents[cursor]
                    word.append(letter)
                    cursor = prev
                return tuple(reversed(word)), nxt
            queue.append(nxt)
    return None


def _diam_search(
    dfa: RlDfa, s: State, s1: State, s2: State, channels: frozenset[int]
) -> State:
    bound = get_settings().max_configs
    if dfa.tca_of is not None:
        candidates = [Config(s, dfa.tca_of(s))]
    else:
        candidates = [config for config in reachable(dfa) if config.state == s]
    for config in candidates:
        tca = config.tca
        everyone = frozenset(range(tca.n))
        for f in range(1, tca.n):
            below = tca.tree.subtree(proc_from_label(tca.tree, f))
            for inner in (below, everyone - below):
                if not all(tca.arch[c] <= inner for c in channels):
                    continue
                second = _side_word(dfa, config, inner, s2, channels, bound)
                if second is None:
                    continue
                first = _side_word(dfa, config, everyone - inner, s1, None, bound)
                if first is None:
                    continue
                merged = run(dfa, second[0], start=first[1])
                if merged.defined:
                    logger.debug(
                        "diam witness: edge %d, words of length %d and %d",
                        f, len(first[0]), len(second[0]),
                    )
                    return merged.last.state
    raise_not_realizable(details={"channels": sorted(channels)})


def diam(dfa: RlDfa, s: State, s1: State, s2: State, channels: Iterable[int]) -> State:
    """
    Combine two views that diverged from a common state.

    ``s1`` and ``s2`` are reached from ``s`` by independent words, the second one using
    only channels in ``channels``; the result is the state reached by both words.

    Raises:
        QueryNotRealizableError: If no witness words exist
    """
    if s2 == s:
        return s1
    if s1 == s:
        return s2
    group = frozenset(channels)
    key = (s, s1, s2, group)
    use_memo = get_settings().diam_cache
    if use_memo:
        with dfa.memo_lock:
            if key in dfa.diam_memo:
                return dfa.diam_memo[key]
    logger.debug("%s: diam cache miss", dfa.name)
    result = _diam_search(dfa, s, s1, s2, group)
    if use_memo:
        with dfa.memo_lock:
            dfa.diam_memo[key] = result
    return result


def diamtree(dfa: RlDfa, node: LabeledNode | None) -> State:
    """Fold ``diam`` over a labelled subtree, peeling children in the given order."""
    if node is None:
        raise_usage_error("diamtree needs a nonempty tree")
    result = node.s2
    for child in reversed(node.children):
        result = diam(dfa, child.s1, result, diamtree(dfa, child), child.channels)
    return result
