"""Compile a diamond-closed RL-DFA into a reconfigurable asynchronous automaton."""

import logging
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, replace

from tcadist.core.errors import (
    DiamondViolationError,
    TcaError,
    raise_blocked,
    raise_usage_error,
)
from tcadist.core.raa import GlobalState, Raa, RaaProcess
from tcadist.core.reconfig import Action, Connect, Disc, Move, Nop, Swap
from tcadist.core.rldfa import (
    LabeledNode,
    RlDfa,
    State,
    advance,
    check_diamond,
    diamtree,
    reachable,
)
from tcadist.core.topology import (
    ROOT_LABEL,
    Neighborhood,
    SubTree,
    Tca,
    channels_beyond,
    make_subtree,
    make_tree,
)

logger = logging.getLogger(__name__)

EMPTY: frozenset[int] = frozenset()
EdgeMap = tuple[tuple[int, frozenset[int]], ...]


def _edge_map(mapping: Mapping[int, Iterable[int]]) -> EdgeMap:
    return tuple(
        (e, frozenset(cs)) for e, cs in sorted(mapping.items()) if e != ROOT_LABEL
    )


@dataclass(frozen=True)
class LocalState:
    """
    State of one process in the distributed automaton.

    ``s1`` is the view shared with the parent, ``s2`` the process's own view. ``cc``
    maps each incident edge to the channels shared with the neighbour along it, ``dc``
    to the unheard channels located beyond it. Missing entries (the root's edge 0
    included) read as empty.
    """

    s1: State
    s2: State
    listening: frozenset[int]
    pedge: int
    cedges: frozenset[int]
    cc: EdgeMap = ()
    dc: EdgeMap = ()

    @classmethod
    def build(
        cls,
        s1: State,
        s2: State,
        listening: Iterable[int],
        pedge: int,
        cedges: Iterable[int],
        cc: Mapping[int, Iterable[int]],
        dc: Mapping[int, Iterable[int]],
    ) -> "LocalState":
        return cls(
            s1=s1,
            s2=s2,
            listening=frozenset(listening),
            pedge=pedge,
            cedges=frozenset(cedges),
            cc=_edge_map(cc),
            dc=_edge_map(dc),
        )

    @property
    def neighborhood(self) -> Neighborhood:
        return Neighborhood(pedge=self.pedge, cedges=self.cedges)

    @property
    def pcedges(self) -> frozenset[int]:
        if self.pedge == ROOT_LABEL:
            return self.cedges
        return self.cedges | {self.pedge}

    def cc_at(self, e: int) -> frozenset[int]:
        return dict(self.cc).get(e, EMPTY)

    def dc_at(self, e: int) -> frozenset[int]:
        return dict(self.dc).get(e, EMPTY)

    def shared_children(self, c: int) -> frozenset[int]:
        """Child edges whose neighbour also listens to ``c``."""
        return frozenset(e for e in self.cedges if c in self.cc_at(e))


@dataclass(frozen=True)
class SyncEntry:
    s1: State
    s2: State
    pedge: int
    cedges: frozenset[int]
    channels: frozenset[int] = EMPTY


SyncData = tuple[SyncEntry, ...]


@dataclass(frozen=True)
class Sync:
    """Data of nop and disconnect communications."""

    entries: SyncData


@dataclass(frozen=True)
class SyncCD:
    """
    Data of swap and move communications.

    ``cc``/``dc`` carry the parent-side channel sets handed over by the old parent.
    ``origin`` is the parent edge of the moved process's current parent (moves only).
    """

    entries: SyncData
    cc: frozenset[int] = EMPTY
    dc: frozenset[int] = EMPTY
    origin: int | None = None


@dataclass(frozen=True)
class SyncE:
    """Data of connect communications: ``edge`` names the inviting neighbour."""

    entries: SyncData
    edge: int


DataValue = Sync | SyncCD | SyncE


def well_formed(ls: LocalState, k: int) -> bool:
    """Edge maps keyed by the incident edges, ``cc`` inside and ``dc`` outside the
    listening set, ``dc`` partitioning the unheard channels."""
    keys = ls.pcedges
    if {e for e, _ in ls.cc} != keys or {e for e, _ in ls.dc} != keys:
        return False
    unheard = frozenset(range(k)) - ls.listening
    seen: set[int] = set()
    for _, cs in ls.cc:
        if not cs <= ls.listening:
            return False
    for _, cs in ls.dc:
        if not cs <= unheard or not seen.isdisjoint(cs):
            return False
        seen |= cs
    return seen == unheard


def local_state_for(tca: Tca, p: int, s1: State, s2: State) -> LocalState:
    """Local state whose topology components describe ``p`` inside ``tca``."""
    tree = tca.tree
    cc: dict[int, frozenset[int]] = {}
    dc: dict[int, frozenset[int]] = {}
    for e in tree.pcedges(p):
        q = tree.parent[p] if e == tree.label[p] else tree.by_label[e]
        cc[e] = tca.shared(p, q)
        dc[e] = channels_beyond(tca, p, e)
    return LocalState.build(
        s1=s1,
        s2=s2,
        listening=tca.listening(p),
        pedge=tree.label[p],
        cedges=(tree.label[q] for q in tree.children[p]),
        cc=cc,
        dc=dc,
    )


def initial_local_state(dfa: RlDfa, p: int) -> LocalState:
    return local_state_for(dfa.arch0, p, dfa.s0, dfa.s0)


def treesync(entries: SyncData) -> SubTree[int]:
    """
    Subtree induced by the entries' neighbourhoods, keyed by entry index.

    Raises:
        TcaError: If the entries do not describe a subtree
    """
    return make_subtree(
        {i: Neighborhood(pedge=entry.pedge, cedges=entry.cedges) for i, entry in enumerate(entries)}
    )


def build_sync(locals_: Sequence[LocalState], c: int) -> SyncData:
    """
    Canonical data for a communication on ``c``: one entry per listener, ascending pedge.

    Raises:
        InconsistentNeighborhoodError: If the listeners do not form a subtree
    """
    participants = sorted((ls for ls in locals_ if c in ls.listening), key=lambda ls: ls.pedge)
    if not participants:
        return ()
    restricted = [ls.shared_children(c) for ls in participants]
    entries = []
    for ls in participants:
        parent = next(
            (other for other, kids in zip(participants, restricted) if ls.pedge in kids), None
        )
        entries.append(
            SyncEntry(
                s1=ls.s1,
                s2=ls.s2,
                pedge=ls.pedge,
                cedges=ls.shared_children(c),
                channels=parent.dc_at(ls.pedge) if parent is not None else EMPTY,
            )
        )
    result = tuple(entries)
    treesync(result)
    return result


def _own_entry(entries: SyncData, ls: LocalState, c: int) -> int | None:
    kids = ls.shared_children(c)
    for i, entry in enumerate(entries):
        if (entry.pedge, entry.cedges, entry.s1, entry.s2) == (ls.pedge, kids, ls.s1, ls.s2):
            return i
    return None


def consistent(entries: SyncData, ls: LocalState, c: int) -> bool:
    """Whether the data agrees with what ``ls`` knows about a communication on ``c``."""
    if c not in ls.listening or len(entries) < 2:
        return False
    pedges = [entry.pedge for entry in entries]
    if len(set(pedges)) != len(pedges):
        return False
    try:
        treesync(entries)
    except TcaError:
        return False
    own = _own_entry(entries, ls, c)
    if own is None:
        return False
    by_pedge = {entry.pedge: entry for entry in entries}
    return all(
        e in by_pedge and by_pedge[e].channels == ls.dc_at(e) for e in entries[own].cedges
    )


def labeled_tree(entries: SyncData) -> LabeledNode:
    sub = treesync(entries)

    def node(i: int) -> LabeledNode:
        entry = entries[i]
        return LabeledNode(
            pedge=entry.pedge,
            s1=entry.s1,
            s2=entry.s2,
            channels=entry.channels,
            children=tuple(node(j) for j in sub.children[i]),
        )

    return node(sub.root)


def state_from_sync(dfa: RlDfa, entries: SyncData) -> State:
    """Most recent state known to the participants, by diamtree over the data."""
    return diamtree(dfa, labeled_tree(entries))


class _Draft:
    """Mutable copy of a local state while a transition row is applied."""

    def __init__(self, ls: LocalState) -> None:
        self.listening = set(ls.listening)
        self.pedge = ls.pedge
        self.cedges = set(ls.cedges)
        self.cc = {e: cs for e, cs in ls.cc}
        self.dc = {e: cs for e, cs in ls.dc}

    def freeze(self, s1: State, s2: State) -> LocalState:
        return LocalState.build(s1, s2, self.listening, self.pedge, self.cedges, self.cc, self.dc)


def _expect(data: DataValue, kind: type, op_name: str) -> None:
    if not isinstance(data, kind):
        raise_blocked(f"{op_name} needs {kind.__name__} data", {"data": type(data).__name__})


def _check_data_kind(data: DataValue, a: Action) -> None:
    op = a.op
    if isinstance(op, (Nop, Disc)):
        _expect(data, Sync, op.kind)
    elif isinstance(op, Swap):
        _expect(data, SyncCD, op.kind)
        if data.origin is not None:
            raise_blocked("swap data carries a move origin")
    elif isinstance(op, Move):
        _expect(data, SyncCD, op.kind)
        if data.origin is None:
            raise_blocked("move data lacks the origin edge")
    else:
        _expect(data, SyncE, op.kind)


def local_step(dfa: RlDfa, ls: LocalState, data: DataValue, a: Action, k: int) -> LocalState:
    """
    Local transition of a listener of ``a.channel``.

    Raises:
        BlockedError: Naming the violated condition when the transition is undefined
    """
    c = a.channel
    op = a.op
    _check_data_kind(data, a)
    entries = data.entries
    if not consistent(entries, ls, c):
        raise_blocked("sync data inconsistent with local state", {"channel": c})
    sub = treesync(entries)
    by_pedge = {entry.pedge: i for i, entry in enumerate(entries)}
    draft = _Draft(ls)
    s1_rule = c in ls.cc_at(ls.pedge)
    s1_override: State | None = None

    if isinstance(op, Swap):
        e = op.e
        child = by_pedge.get(e)
        if child is None or child == sub.root:
            raise_blocked("swap edge is not a child edge of the sync subtree", {"edge": e})
        upper = entries[sub.parent[child]]
        if e in ls.cedges:
            if e not in upper.cedges or upper.pedge != ls.pedge:
                raise_blocked("swap edge not shared on the channel", {"edge": e})
            if data.cc != ls.cc_at(ls.pedge) or data.dc != ls.dc_at(ls.pedge):
                raise_blocked("swap data disagrees with the parent's edge maps")
            draft.cedges.discard(e)
            draft.cc.pop(ls.pedge, None)
            draft.dc.pop(ls.pedge, None)
            draft.dc[e] = ls.dc_at(e) | data.dc
            draft.pedge = e
            s1_rule = True
        elif ls.pedge == e:
            if not data.cc <= ls.listening:
                raise_blocked("swapped process misses a channel shared upward", {"edge": e})
            draft.cedges.add(e)
            draft.dc[e] = ls.dc_at(e) - data.dc
            if upper.pedge != ROOT_LABEL:
                draft.cc[upper.pedge] = data.cc
                draft.dc[upper.pedge] = data.dc
            draft.pedge = upper.pedge
            s1_rule = c in data.cc
            s1_override = None if s1_rule else upper.s1

    elif isinstance(op, Move):
        e, target, origin = op.e, op.target, data.origin
        if target not in by_pedge:
            raise_blocked("new parent does not listen to the channel", {"edge": target})
        if origin not in by_pedge:
            raise_blocked("old parent does not listen to the channel", {"edge": origin})
        new_i, old_i = by_pedge[target], by_pedge[origin]
        adjacent = (
            new_i == old_i or sub.parent.get(new_i) == old_i or sub.parent.get(old_i) == new_i
        )
        if not adjacent:
            raise_blocked("new parent does not neighbour the old parent")
        if (e in ls.cedges) != (ls.pedge == origin):
            raise_blocked("move origin does not hold the moved edge", {"edge": e})
        if ls.pedge == origin and (data.cc != ls.cc_at(e) or data.dc != ls.dc_at(e)):
            raise_blocked("move data disagrees with the old parent's edge maps")
        if ls.pedge == target and not data.cc <= ls.listening:
            raise_blocked("new parent misses a channel shared with the moved process")
        if new_i != old_i:
            if ls.pedge == origin:
                toward = target if sub.parent.get(new_i) == old_i else ls.pedge
                draft.cedges.discard(e)
                draft.cc.pop(e, None)
                draft.dc.pop(e, None)
                draft.dc[toward] = draft.dc.get(toward, EMPTY) | data.dc
            elif ls.pedge == target:
                draft.cedges.add(e)
                for f in list(draft.dc):
                    draft.dc[f] = draft.dc[f] - data.dc
                draft.cc[e] = data.cc
                draft.dc[e] = data.dc

    elif isinstance(op, Connect):
        e, joined, inviter = op.e, op.channel, data.edge
        if not 0 <= joined < k:
            raise_blocked("joined channel out of range", {"channel": joined})
        if e not in by_pedge or inviter not in by_pedge:
            raise_blocked("connect endpoints must listen to the channel")
        p_i, q_i = by_pedge[e], by_pedge[inviter]
        if sub.parent.get(p_i) == q_i:
            shared_edge = e
        elif sub.parent.get(q_i) == p_i:
            shared_edge = inviter
        else:
            raise_blocked("inviter is not a neighbour in the sync subtree")
        if ls.pedge == e:
            if joined in ls.listening:
                raise_blocked("process already listens to the joined channel")
            draft.listening.add(joined)
            draft.cc[shared_edge] = ls.cc_at(shared_edge) | {joined}
            draft.dc[shared_edge] = ls.dc_at(shared_edge) - {joined}
        elif ls.pedge == inviter:
            if joined not in ls.listening:
                raise_blocked("inviter does not listen to the joined channel")
            draft.cc[shared_edge] = ls.cc_at(shared_edge) | {joined}

    elif isinstance(op, Disc):
        e = op.e
        if len(entries) < 3:
            raise_blocked("channel would drop below two listeners")
        leaving = by_pedge.get(e)
        if leaving is None:
            raise_blocked("leaving process does not listen to the channel", {"edge": e})
        if leaving != sub.root and not sub.children[leaving]:
            shared_edge = e
        elif leaving == sub.root and len(sub.children[leaving]) == 1:
            shared_edge = entries[sub.children[leaving][0]].pedge
        else:
            raise_blocked("process is not at the boundary of the channel", {"edge": e})
        if shared_edge in ls.pcedges and not ls.cc_at(shared_edge) - {c}:
            raise_blocked("edge would lose its last shared channel", {"edge": shared_edge})
        if ls.pedge == e:
            draft.listening.discard(c)
            draft.cc[shared_edge] = ls.cc_at(shared_edge) - {c}
            draft.dc[shared_edge] = ls.dc_at(shared_edge) | {c}
        elif shared_edge in ls.pcedges:
            draft.cc[shared_edge] = ls.cc_at(shared_edge) - {c}

    reached = dfa.delta(state_from_sync(dfa, entries), a)
    if reached is None:
        raise_blocked("no transition from the synchronized state", {"channel": c})
    if s1_override is not None:
        s1 = s1_override
    else:
        s1 = reached if s1_rule else ls.s1
    return draft.freeze(s1, reached)


def _by_pedge(g: Sequence[LocalState], e: int) -> LocalState | None:
    return next((ls for ls in g if ls.pedge == e), None)


def _owner(g: Sequence[LocalState], e: int) -> LocalState | None:
    return next((ls for ls in g if e in ls.cedges), None)


def propose_data(g: Sequence[LocalState], a: Action) -> DataValue:
    """Canonical data for a communication, gathered from the listeners' states."""
    entries = build_sync(g, a.channel)
    op = a.op
    if isinstance(op, Swap):
        upper = _owner(g, op.e)
        if upper is None:
            return SyncCD(entries)
        return SyncCD(entries, upper.cc_at(upper.pedge), upper.dc_at(upper.pedge))
    if isinstance(op, Move):
        upper = _owner(g, op.e)
        if upper is None:
            return SyncCD(entries, origin=-1)
        return SyncCD(entries, upper.cc_at(op.e), upper.dc_at(op.e), origin=upper.pedge)
    if isinstance(op, Connect):
        p = _by_pedge(g, op.e)
        if p is None:
            return SyncE(entries, edge=-1)
        neighbours = []
        for f in sorted(p.pcedges):
            q = _owner(g, f) if f == p.pedge else _by_pedge(g, f)
            if q is not None:
                neighbours.append(q)
        inviting = [
            q for q in neighbours if a.channel in q.listening and op.channel in q.listening
        ]
        chosen = inviting[0] if inviting else (neighbours[0] if neighbours else None)
        return SyncE(entries, edge=chosen.pedge if chosen is not None else -1)
    return Sync(entries)


def accept_data(g: Sequence[LocalState], k: int) -> Sync | None:
    """
    The unique global sync candidate, if it is globally consistent with every process.

    Entries are ordered by parent edge ``0..n-1`` and carry full child edges; the
    entry of edge ``e`` carries the parent's ``dc(e)``.
    """
    if sorted(ls.pedge for ls in g) != list(range(len(g))):
        return None
    entries = []
    for i in range(len(g)):
        ls = _by_pedge(g, i)
        channels = EMPTY
        if i != ROOT_LABEL:
            parent = _owner(g, i)
            if parent is None:
                return None
            channels = parent.dc_at(i)
        entries.append(SyncEntry(ls.s1, ls.s2, ls.pedge, ls.cedges, channels))
    candidate = tuple(entries)
    if not all(globally_consistent(candidate, ls, k) for ls in g):
        return None
    return Sync(candidate)


def globally_consistent(entries: SyncData, ls: LocalState, k: int) -> bool:
    if not well_formed(ls, k):
        return False
    if [entry.pedge for entry in entries] != list(range(len(entries))):
        return False
    try:
        make_tree([Neighborhood(entry.pedge, entry.cedges) for entry in entries])
    except TcaError:
        return False
    if not 0 <= ls.pedge < len(entries):
        return False
    own = entries[ls.pedge]
    if (own.s1, own.s2, own.cedges) != (ls.s1, ls.s2, ls.cedges):
        return False
    return all(entries[e].channels == ls.dc_at(e) for e in ls.cedges)


def global_state(dfa: RlDfa, g: Sequence[LocalState], k: int) -> State | None:
    """Centralized state recovered from a global state; ``None`` without a candidate."""
    candidate = accept_data(g, k)
    if candidate is None:
        return None
    return state_from_sync(dfa, candidate.entries)


def accepting_local(dfa: RlDfa, ls: LocalState, data: DataValue | None, k: int) -> bool:
    if not isinstance(data, Sync) or not globally_consistent(data.entries, ls, k):
        return False
    return dfa.is_final(state_from_sync(dfa, data.entries))


def architecture_of(g: Sequence[LocalState], k: int) -> Tca:
    """Collect the listening sets and neighbourhoods of a global state into a TCA."""
    arch = tuple(frozenset(p for p, ls in enumerate(g) if c in ls.listening) for c in range(k))
    return Tca(arch=arch, tree=make_tree([ls.neighborhood for ls in g]))


def distribute(dfa: RlDfa, verify: bool = True) -> Raa:
    """
    Build the RAA distributing ``dfa``.

    Raises:
        DiamondViolationError: If ``verify`` is set and the automaton is not diamond closed
    """
    if verify:
        report = check_diamond(dfa)
        if not report.ok:
            cex = report.counterexample
            raise DiamondViolationError(
                "automaton is not diamond closed",
                {
                    "state": repr(cex.config.state),
                    "first": repr(cex.first),
                    "second": repr(cex.second),
                },
            )
    k = dfa.arch0.k

    def delta(ls: LocalState, data: DataValue, a: Action) -> LocalState:
        return local_step(dfa, ls, data, a, k)

    def accepting(ls: LocalState, data: DataValue | None) -> bool:
        return accepting_local(dfa, ls, data, k)

    processes = tuple(
        RaaProcess(
            initial=initial_local_state(dfa, p),
            delta=delta,
            listening=lambda ls: ls.listening,
            accepting=accepting,
        )
        for p in range(dfa.arch0.n)
    )

    def candidates(g: GlobalState) -> list[Sync]:
        found = accept_data(g, k)
        return [found] if found is not None else []

    return Raa(
        processes=processes,
        channels=k,
        propose_data=propose_data,
        acceptance_data=candidates,
        name=f"distributed {dfa.name}",
    )


def specialize_fixed(dfa: RlDfa) -> Raa:
    """
    RAA for automata that never reconfigure: each process keeps only its state pair.

    Raises:
        UsageError: If some reachable transition is not a nop
    """
    reconfiguring = [a for a in dfa.alphabet if not isinstance(a.op, Nop)]
    if reconfiguring:
        for config in reachable(dfa):
            for a in reconfiguring:
                if advance(dfa, config, a)[0] is not None:
                    raise_usage_error(
                        "fixed-architecture automaton has a reconfiguring transition",
                        {"state": repr(config.state), "channel": a.channel, "op": a.kind},
                    )
    k = dfa.arch0.k
    frozen = tuple(initial_local_state(dfa, p) for p in range(dfa.arch0.n))

    def expand(g: GlobalState) -> list[LocalState]:
        return [replace(ls, s1=pair[0], s2=pair[1]) for ls, pair in zip(frozen, g)]

    def make_process(context: LocalState) -> RaaProcess:
        def delta(pair: tuple[State, State], data: DataValue, a: Action) -> tuple[State, State]:
            if not isinstance(a.op, Nop):
                raise_blocked("fixed architecture reads only nop actions")
            moved = local_step(dfa, replace(context, s1=pair[0], s2=pair[1]), data, a, k)
            return moved.s1, moved.s2

        def accepting(pair: tuple[State, State], data: DataValue | None) -> bool:
            return accepting_local(dfa, replace(context, s1=pair[0], s2=pair[1]), data, k)

        return RaaProcess(
            initial=(dfa.s0, dfa.s0),
            delta=delta,
            listening=lambda _pair: context.listening,
            accepting=accepting,
        )

    def candidates(g: GlobalState) -> list[Sync]:
        found = accept_data(expand(g), k)
        return [found] if found is not None else []

    return Raa(
        processes=tuple(make_process(ls) for ls in frozen),
        channels=k,
        propose_data=lambda g, a: propose_data(expand(g), a),
        acceptance_data=candidates,
        name=f"fixed {dfa.name}",
    )


def _bits(value: int, width: int) -> str:
    """Binary ``value`` padded to ``width``; wider when it does not fit."""
    return format(value, "b").zfill(width)


def _mask(ids: Iterable[int], width: int) -> str:
    members = set(ids)
    size = max(width, max(members, default=-1) + 1)
    return "".join("1" if i in members else "0" for i in range(size))


def encode_local_state(
    ls: LocalState, n: int, k: int, state_bits: int, state_index: Mapping[State, int]
) -> str:
    """
    Bit string of ``ls``.

    Layout: ``s1`` and ``s2`` as indexes into ``state_index``, the listening set as a
    ``k``-bit mask, ``pedge`` in ``n.bit_length()`` bits, the child edges as an ``n``-bit
    mask, then ``cc`` and ``dc`` masks for every parent or child edge. Map entries on
    other edges follow with their label written out. States missing from the index get
    fresh indexes past its end.
    """
    index = dict(state_index)
    for s in (ls.s1, ls.s2):
        index.setdefault(s, len(index))
    label_bits = n.bit_length()
    parts = [
        _bits(index[ls.s1], state_bits),
        _bits(index[ls.s2], state_bits),
        _mask(ls.listening, k),
        _bits(ls.pedge, label_bits),
        _mask(ls.cedges, n),
    ]
    incident = sorted(ls.pcedges)
    for e in incident:
        parts.append(_mask(ls.cc_at(e), k) + _mask(ls.dc_at(e), k))
    stray = sorted({e for e, _ in ls.cc + ls.dc} - set(incident))
    for e in stray:
        parts.append(_bits(e, label_bits) + _mask(ls.cc_at(e), k) + _mask(ls.dc_at(e), k))
    return "".join(parts)


def encoded_size_bits(
    ls: LocalState, n: int, k: int, state_bits: int, state_index: Mapping[State, int]
) -> int:
    return len(encode_local_state(ls, n, k, state_bits, state_index))


def size_bound_bits(n: int, k: int, state_bits: int) -> int:
    return 2 * state_bits + 3 * (k + 1) * (n + 1)
