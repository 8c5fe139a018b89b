"""Reconfigurable asynchronous automata: listening processes synchronizing on channels."""

import logging
from collections.abc import Callable, Hashable, Iterable, Mapping, Sequence
from dataclasses import dataclass
from typing import Any

from tcadist.core.errors import BlockedError, ChannelDeadError, raise_blocked
from tcadist.core.reconfig import Action, Nop

logger = logging.getLogger(__name__)

GlobalState = tuple[Any, ...]


@dataclass(frozen=True)
class RaaProcess:
    """
    One process of an RAA, given by functions rather than enumerated states.

    ``delta`` raises ``BlockedError`` where the local transition is undefined.
    """

    initial: Any
    delta: Callable[[Any, Any, Action], Any]
    listening: Callable[[Any], frozenset[int]]
    accepting: Callable[[Any, Any], bool]


def _unit_data(_g: GlobalState, _a: Action) -> Any:
    return None


def _unit_candidates(_g: GlobalState) -> Iterable[Any]:
    return (None,)


@dataclass(frozen=True)
class Raa:
    """
    Processes plus the builder-supplied data strategies.

    ``propose_data`` produces the data value exchanged on a communication and
    ``acceptance_data`` yields the candidates tried when checking acceptance.
    """

    processes: tuple[RaaProcess, ...]
    channels: int
    propose_data: Callable[[GlobalState, Action], Any] = _unit_data
    acceptance_data: Callable[[GlobalState], Iterable[Any]] = _unit_candidates
    name: str = "raa"

    @property
    def n(self) -> int:
        return len(self.processes)


@dataclass(frozen=True)
class RaaRunResult:
    states: tuple[GlobalState, ...]
    data: tuple[Any, ...]
    undefined_at: int | None = None
    blockers: tuple[int, ...] = ()
    reason: str | None = None

    @property
    def defined(self) -> bool:
        return self.undefined_at is None

    @property
    def last(self) -> GlobalState:
        return self.states[-1]


@dataclass(frozen=True)
class Acceptance:
    accepted: bool
    witness: Any = None


def initial_state(raa: Raa) -> GlobalState:
    return tuple(proc.initial for proc in raa.processes)


def listeners(raa: Raa, g: GlobalState, c: int) -> list[int]:
    return [p for p, proc in enumerate(raa.processes) if c in proc.listening(g[p])]


def step(raa: Raa, g: GlobalState, d: Any, a: Action) -> GlobalState:
    """
    Communicate on ``a.channel`` with data ``d``.

    Every listener moves; everybody else keeps its state.

    Raises:
        ChannelDeadError: If nobody listens to the channel
        BlockedError: If some listener has no transition, naming the blockers
    """
    involved = listeners(raa, g, a.channel)
    if not involved:
        raise ChannelDeadError("channel dead", {"channel": a.channel})
    moved = list(g)
    reasons: dict[int, str] = {}
    for p in involved:
        try:
            moved[p] = raa.processes[p].delta(g[p], d, a)
        except BlockedError as exc:
            reasons[p] = exc.message
    if reasons:
        logger.debug("%s: channel %d blocked by %s", raa.name, a.channel, sorted(reasons))
        raise_blocked(
            "listeners block",
            {"channel": a.channel, "blockers": sorted(reasons), "reasons": reasons},
        )
    return tuple(moved)


def run_with_data(
    raa: Raa, word: Sequence[tuple[Any, Action]], start: GlobalState | None = None
) -> RaaRunResult:
    """Fold ``step`` over ``(data, action)`` pairs, stopping at the first failure."""
    g = start if start is not None else initial_state(raa)
    states = [g]
    used = []
    for i, (d, a) in enumerate(word):
        try:
            g = step(raa, g, d, a)
        except ChannelDeadError as exc:
            return RaaRunResult(tuple(states), tuple(used), undefined_at=i, reason=exc.message)
        except BlockedError as exc:
            return RaaRunResult(
                tuple(states),
                tuple(used),
                undefined_at=i,
                blockers=tuple(exc.details.get("blockers", ())),
                reason=exc.message,
            )
        states.append(g)
        used.append(d)
    return RaaRunResult(tuple(states), tuple(used))


def run_word(raa: Raa, word: Sequence[Action], start: GlobalState | None = None) -> RaaRunResult:
    """Run on bare actions, asking the automaton for the data of each step."""
    g = start if start is not None else initial_state(raa)
    states = [g]
    used = []
    for i, a in enumerate(word):
        d = raa.propose_data(g, a)
        result = run_with_data(raa, [(d, a)], start=g)
        if not result.defined:
            return RaaRunResult(
                tuple(states),
                tuple(used),
                undefined_at=i,
                blockers=result.blockers,
                reason=result.reason,
            )
        g = result.last
        states.append(g)
        used.append(d)
    return RaaRunResult(tuple(states), tuple(used))


def accepts(raa: Raa, g: GlobalState) -> Acceptance:
    """Accept when all processes agree on one data value; the value is the witness."""
    for d in raa.acceptance_data(g):
        if all(proc.accepting(g[p], d) for p, proc in enumerate(raa.processes)):
            return Acceptance(True, d)
    return Acceptance(False)


def table_process(
    initial: Hashable,
    transitions: Mapping[tuple[Hashable, int], Hashable],
    listening: Mapping[Hashable, Iterable[int]],
    accepting: Callable[[Any, Any], bool] = lambda _s, _d: True,
) -> RaaProcess:
    """Process reading only the channel of nop actions, from explicit tables."""
    heard = {s: frozenset(cs) for s, cs in listening.items()}

    def delta(s: Any, _d: Any, a: Action) -> Any:
        if not isinstance(a.op, Nop):
            raise_blocked("only nop actions are read")
        target = transitions.get((s, a.channel))
        if target is None:
            raise_blocked("no local transition", {"state": s, "channel": a.channel})
        return target

    return RaaProcess(
        initial=initial,
        delta=delta,
        listening=lambda s: heard[s],
        accepting=accepting,
    )


def parity_example() -> Raa:
    """
    Three processes over channels a, b, c (ids 0, 1, 2).

    ``c`` can be read only after an even number of ``a`` and an even number of ``b``.
    """
    a, b, c = 0, 1, 2
    p = table_process(
        "s1", {("s1", a): "s2", ("s2", a): "s1"}, {"s1": {a}, "s2": {a, c}}
    )
    q = table_process(
        "t1", {("t1", b): "t2", ("t2", b): "t1"}, {"t1": {b}, "t2": {b, c}}
    )
    r = table_process("u1", {("u1", c): "u1"}, {"u1": {c}})
    return Raa(processes=(p, q, r), channels=3, name="parity")
