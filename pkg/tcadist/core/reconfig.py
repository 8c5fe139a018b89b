"""Reconfiguration operations on TCAs and the universality planner."""

import logging
from collections.abc import Iterable
from dataclasses import dataclass
from typing import ClassVar

from tcadist.core.errors import TcaError, raise_invalid_operation, raise_usage_error
from tcadist.core.topology import NO_PARENT, ROOT_LABEL, Tca, Tree, proc_from_label

logger = logging.getLogger(__name__)

OP_KINDS = ("nop", "swap", "move", "conn", "disc")


@dataclass(frozen=True)
class Nop:
    kind: ClassVar[str] = "nop"


@dataclass(frozen=True)
class Swap:
    """Exchange the process at edge ``e`` with its parent."""

    kind: ClassVar[str] = "swap"
    e: int

    def __post_init__(self) -> None:
        if self.e < 1:
            raise_usage_error("swap needs an edge label >= 1", {"e": self.e})


@dataclass(frozen=True)
class Move:
    """Re-parent the process at edge ``e`` under the process at ``target``."""

    kind: ClassVar[str] = "move"
    e: int
    target: int

    def __post_init__(self) -> None:
        if self.e < 1:
            raise_usage_error("move needs an edge label >= 1", {"e": self.e})
        if self.e == self.target:
            raise_usage_error("move source and target coincide", {"e": self.e})


@dataclass(frozen=True)
class Connect:
    """Invite the process at edge ``e`` to join ``channel``."""

    kind: ClassVar[str] = "conn"
    e: int
    channel: int


@dataclass(frozen=True)
class Disc:
    kind: ClassVar[str] = "disc"
    e: int


Op = Nop | Swap | Move | Connect | Disc


@dataclass(frozen=True)
class Action:
    """A letter of the reconfiguration alphabet: a channel and an operation."""

    channel: int
    op: Op

    @property
    def kind(self) -> str:
        return self.op.kind


def _neighbors_by_label(tree: Tree, p: int) -> list[int]:
    return sorted(tree.neighbors(p), key=lambda q: tree.edge_between(p, q))


def connect_witness(tca: Tca, p: int, c: int, joined: int) -> int | None:
    """Smallest-label neighbour of ``p`` able to invite it from ``c`` into ``joined``."""
    if p not in tca.arch[c]:
        return None
    for q in _neighbors_by_label(tca.tree, p):
        if q in tca.arch[c] and q in tca.arch[joined]:
            return q
    return None


def check_valid(tca: Tca, a: Action) -> str | None:
    """
    Check the side conditions of an action.

    Args:
        tca: Current architecture
        a: Action to check

    Returns:
        ``None`` when the action is possible, otherwise the violated clause
    """
    n, k = tca.n, tca.k
    c = a.channel
    op = a.op
    if not 0 <= c < k:
        return f"channel {c} out of range"
    if isinstance(op, Nop):
        return None
    if not 0 <= op.e < n:
        return f"edge label {op.e} out of range"

    tree = tca.tree
    members = tca.arch[c]
    p = proc_from_label(tree, op.e)

    if isinstance(op, Swap):
        q = tree.parent[p]
        if p not in members or q not in members:
            return "swap: both endpoints of the edge must listen to the channel"
        up = tree.parent[q]
        if up != NO_PARENT:
            for shared in sorted(tca.shared(q, up)):
                if p not in tca.arch[shared]:
                    return f"swap: process would leave channel {shared} disconnected"
        return None

    if isinstance(op, Move):
        if not 0 <= op.target < n:
            return f"edge label {op.target} out of range"
        q = proc_from_label(tree, op.target)
        old = tree.parent[p]
        if q != old and not tree.is_neighbor(old, q):
            return "move: new parent must neighbour the current parent"
        if q not in members or old not in members:
            return "move: old and new parent must listen to the channel"
        for shared in sorted(tca.shared(p, old)):
            if q not in tca.arch[shared]:
                return f"move: new parent does not listen to shared channel {shared}"
        return None

    if isinstance(op, Connect):
        if not 0 <= op.channel < k:
            return f"channel {op.channel} out of range"
        if p in tca.arch[op.channel]:
            return "connect: process already listens to the joined channel"
        if connect_witness(tca, p, c, op.channel) is None:
            return "connect: no neighbour invites the process"
        return None

    if len(members) < 3:
        return "disc: channel would drop below two listeners"
    if p not in members:
        return "disc: process does not listen to the channel"
    inside = [q for q in tree.neighbors(p) if q in members]
    if len(inside) != 1:
        return "disc: process is not at the boundary of the channel"
    q = inside[0]
    if not any(p in ms and q in ms for other, ms in enumerate(tca.arch) if other != c):
        return "disc: edge to the remaining neighbour would lose its last channel"
    return None


def apply(tca: Tca, a: Action) -> Tca:
    """
    Apply an action to a TCA.

    Raises:
        InvalidOperationError: If the side conditions fail
    """
    reason = check_valid(tca, a)
    if reason is not None:
        raise_invalid_operation(reason, {"channel": a.channel, "op": a.kind})

    op = a.op
    if isinstance(op, Nop):
        return tca
    tree = tca.tree
    p = proc_from_label(tree, op.e)

    if isinstance(op, Connect):
        return tca.with_members(op.channel, tca.arch[op.channel] | {p})
    if isinstance(op, Disc):
        return tca.with_members(a.channel, tca.arch[a.channel] - {p})

    parent = list(tree.parent)
    label = list(tree.label)
    root = tree.root
    if isinstance(op, Swap):
        q = tree.parent[p]
        parent[p] = tree.parent[q]
        label[p] = tree.label[q]
        parent[q] = p
        label[q] = op.e
        if q == root:
            root = p
    else:
        parent[p] = proc_from_label(tree, op.target)
    return tca.with_tree(Tree(root=root, parent=tuple(parent), label=tuple(label)))


def all_actions(n: int, k: int, kinds: Iterable[str] | None = None) -> tuple[Action, ...]:
    """Enumerate the reconfiguration alphabet for ``n`` processes and ``k`` channels."""
    allowed = frozenset(kinds) if kinds is not None else frozenset(OP_KINDS)
    unknown = allowed - set(OP_KINDS)
    if unknown:
        raise_usage_error("unknown operation kinds", {"kinds": sorted(unknown)})
    letters: list[Action] = []
    for c in range(k):
        if "nop" in allowed:
            letters.append(Action(c, Nop()))
        if "swap" in allowed:
            letters.extend(Action(c, Swap(e)) for e in range(1, n))
        if "move" in allowed:
            letters.extend(
                Action(c, Move(e, t)) for e in range(1, n) for t in range(n) if t != e
            )
        if "conn" in allowed:
            letters.extend(
                Action(c, Connect(e, other)) for e in range(n) for other in range(k) if other != c
            )
        if "disc" in allowed:
            letters.extend(Action(c, Disc(e)) for e in range(n))
    return tuple(letters)


def valid_actions(tca: Tca, alphabet: Iterable[Action]) -> list[Action]:
    return [a for a in alphabet if check_valid(tca, a) is None]


class _Replay:
    """Current architecture plus the actions recorded so far."""

    def __init__(self, tca: Tca) -> None:
        self.tca = tca
        self.actions: list[Action] = []

    def do(self, action: Action) -> None:
        self.tca = apply(self.tca, action)
        self.actions.append(action)

    def label(self, p: int) -> int:
        return self.tca.tree.label[p]


def _connect_everyone(run: _Replay) -> None:
    for joined in range(run.tca.k):
        while len(run.tca.arch[joined]) < run.tca.n:
            tree = run.tca.tree
            members = run.tca.arch[joined]
            frontier = sorted(
                (p for p in range(tree.n) if p not in members
                 and any(q in members for q in tree.neighbors(p))),
                key=run.label,
            )
            p = frontier[0]
            q = next(q for q in _neighbors_by_label(tree, p) if q in members)
            inviting = min(run.tca.shared(p, q))
            run.do(Action(inviting, Connect(run.label(p), joined)))


def _flatten(run: _Replay) -> None:
    while True:
        tree = run.tca.tree
        deep = sorted((p for p in range(tree.n) if tree.depth(p) >= 2), key=run.label)
        if not deep:
            return
        p = deep[0]
        grand = tree.parent[tree.parent[p]]
        run.do(Action(0, Move(run.label(p), run.label(grand))))


def _permute_labels(run: _Replay, target: Tree) -> None:
    new_root = target.root
    while True:
        tree = run.tca.tree
        root = tree.root
        if root != new_root:
            y = tree.by_label[target.label[root]]
        else:
            misplaced = sorted(
                (p for p in range(tree.n) if p != root and tree.label[p] != target.label[p]),
                key=run.label,
            )
            if not misplaced:
                return
            y = misplaced[0]
        run.do(Action(0, Swap(run.label(y))))
        for z in run.tca.tree.children[root]:
            run.do(Action(0, Move(run.label(z), ROOT_LABEL)))


def _rebuild(run: _Replay, target: Tree) -> None:
    order = [target.root]
    for p in order:
        order.extend(target.children[p])
    for p in order[1:]:
        path = []
        up = target.parent[p]
        while up != target.root:
            path.append(up)
            up = target.parent[up]
        for ancestor in reversed(path):
            run.do(Action(0, Move(run.label(p), run.label(ancestor))))


def _disconnect_extras(run: _Replay, target: Tca) -> None:
    for c in range(target.k):
        while run.tca.arch[c] != target.arch[c]:
            tree = run.tca.tree
            members = run.tca.arch[c]
            leaves = sorted(
                (p for p in members - target.arch[c]
                 if sum(q in members for q in tree.neighbors(p)) == 1),
                key=run.label,
            )
            run.do(Action(c, Disc(run.label(leaves[0]))))


def plan(source: Tca, target: Tca) -> list[Action]:
    """
    Compute a sequence of valid actions transforming ``source`` into ``target``.

    Connects every process to every channel, brings the target root up, flattens the tree
    into a star, fixes edge labels with root swaps, rebuilds the target tree top-down and
    finally disconnects surplus memberships from the leaves inward.

    Raises:
        UsageError: If the two TCAs range over different universes
    """
    if source.n != target.n or source.k != target.k:
        raise_usage_error(
            "plan endpoints use different universes",
            {"from": [source.n, source.k], "to": [target.n, target.k]},
        )
    run = _Replay(source)
    _connect_everyone(run)
    logger.debug("plan: connected everyone after %d actions", len(run.actions))
    while run.tca.tree.root != target.tree.root:
        run.do(Action(0, Swap(run.label(target.tree.root))))
    _flatten(run)
    _permute_labels(run, target.tree)
    _rebuild(run, target.tree)
    logger.debug("plan: tree rebuilt after %d actions", len(run.actions))
    _disconnect_extras(run, target)
    if run.tca != target:
        raise TcaError("planner did not reach the target architecture")
    return run.actions
