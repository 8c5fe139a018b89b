"""Tree-like communication architectures: trees, memberships, neighborhoods."""

import logging
from collections.abc import Hashable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from functools import cached_property
from typing import Generic, TypeVar

import networkx as nx

from tcadist.core.errors import raise_inconsistent, raise_usage_error

logger = logging.getLogger(__name__)

ROOT_LABEL = 0
NO_PARENT = -1

K = TypeVar("K", bound=Hashable)


@dataclass(frozen=True)
class Tree:
    """
    Rooted spanning tree over processes ``0..n-1`` with labelled edges.

    ``parent[p]`` is ``NO_PARENT`` and ``label[p]`` is ``ROOT_LABEL`` for the root;
    every other process stores its parent and the label of its parent edge.
    """

    root: int
    parent: tuple[int, ...]
    label: tuple[int, ...]

    @classmethod
    def from_edges(cls, n: int, root: int, edges: Iterable[tuple[int, int, int]]) -> "Tree":
        """Build a tree from ``(parent, child, label)`` triples."""
        parent = [NO_PARENT] * n
        label = [ROOT_LABEL] * n
        for up, down, lab in edges:
            if not (0 <= up < n and 0 <= down < n):
                raise_usage_error("edge endpoint outside the process universe", {"edge": lab})
            if parent[down] != NO_PARENT or down == root:
                raise_usage_error("process has two parent edges", {"process": down})
            parent[down] = up
            label[down] = lab
        tree = cls(root=root, parent=tuple(parent), label=tuple(label))
        check_tree(tree)
        return tree

    @property
    def n(self) -> int:
        return len(self.parent)

    @cached_property
    def children(self) -> tuple[tuple[int, ...], ...]:
        kids: list[list[int]] = [[] for _ in range(self.n)]
        for p, up in enumerate(self.parent):
            if up != NO_PARENT:
                kids[up].append(p)
        return tuple(tuple(sorted(ks, key=lambda q: self.label[q])) for ks in kids)

    @cached_property
    def by_label(self) -> tuple[int, ...]:
        procs = [self.root] * self.n
        for p, lab in enumerate(self.label):
            if p != self.root:
                procs[lab] = p
        return tuple(procs)

    @cached_property
    def graph(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        for p, up in enumerate(self.parent):
            if up != NO_PARENT:
                g.add_edge(up, p, label=self.label[p])
        return g

    def edges(self) -> list[tuple[int, int, int]]:
        """``(parent, child, label)`` triples in ascending label order."""
        return sorted(
            ((up, p, self.label[p]) for p, up in enumerate(self.parent) if up != NO_PARENT),
            key=lambda t: t[2],
        )

    def neighbors(self, p: int) -> tuple[int, ...]:
        up = self.parent[p]
        return ((up,) if up != NO_PARENT else ()) + self.children[p]

    def is_neighbor(self, p: int, q: int) -> bool:
        return self.parent[p] == q or self.parent[q] == p

    def edge_between(self, p: int, q: int) -> int:
        """Label of the edge joining two neighbours."""
        if self.parent[p] == q:
            return self.label[p]
        if self.parent[q] == p:
            return self.label[q]
        raise_usage_error("processes are not neighbours", {"p": p, "q": q})

    def pcedges(self, p: int) -> frozenset[int]:
        edges = {self.label[q] for q in self.children[p]}
        if p != self.root:
            edges.add(self.label[p])
        return frozenset(edges)

    def subtree(self, p: int) -> frozenset[int]:
        seen = {p}
        stack = [p]
        while stack:
            for q in self.children[stack.pop()]:
                seen.add(q)
                stack.append(q)
        return frozenset(seen)

    def beyond(self, p: int, e: int) -> frozenset[int]:
        """Processes reached from ``p`` by a path starting with edge ``e``."""
        if p != self.root and e == self.label[p]:
            return frozenset(range(self.n)) - self.subtree(p)
        child = self.by_label[e]
        if self.parent[child] != p:
            raise_usage_error("edge is not incident to process", {"process": p, "edge": e})
        return self.subtree(child)

    def depth(self, p: int) -> int:
        d = 0
        while self.parent[p] != NO_PARENT:
            p = self.parent[p]
            d += 1
        return d


@dataclass(frozen=True)
class Tca:
    """Communication architecture (``arch[c]`` = members of channel ``c``) plus its tree."""

    arch: tuple[frozenset[int], ...]
    tree: Tree

    @property
    def n(self) -> int:
        return self.tree.n

    @property
    def k(self) -> int:
        return len(self.arch)

    def members(self, c: int) -> frozenset[int]:
        return self.arch[c]

    def listening(self, p: int) -> frozenset[int]:
        return frozenset(c for c, ms in enumerate(self.arch) if p in ms)

    def shared(self, p: int, q: int) -> frozenset[int]:
        return frozenset(c for c, ms in enumerate(self.arch) if p in ms and q in ms)

    def with_members(self, c: int, members: frozenset[int]) -> "Tca":
        arch = list(self.arch)
        arch[c] = members
        return Tca(arch=tuple(arch), tree=self.tree)

    def with_tree(self, tree: Tree) -> "Tca":
        return Tca(arch=self.arch, tree=tree)


@dataclass(frozen=True)
class Neighborhood:
    pedge: int
    cedges: frozenset[int] = frozenset()

    def __post_init__(self) -> None:
        if self.pedge in self.cedges or ROOT_LABEL in self.cedges:
            raise_usage_error(
                "neighborhood repeats its parent edge or uses label 0 as a child edge",
                {"pedge": self.pedge, "cedges": sorted(self.cedges)},
            )

    @property
    def pcedges(self) -> frozenset[int]:
        if self.pedge == ROOT_LABEL:
            return self.cedges
        return self.cedges | {self.pedge}


@dataclass(frozen=True)
class Violation:
    """One falsified Definition-1 condition with its witness."""

    condition: int
    channel: int | None = None
    edge: int | None = None
    witness: tuple[int, ...] = ()


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations


@dataclass(frozen=True)
class SubTree(Generic[K]):
    """Tree induced by a consistent neighborhood family over arbitrary keys."""

    root: K
    pedge: Mapping[K, int]
    parent: Mapping[K, K] = field(default_factory=dict)
    children: Mapping[K, tuple[K, ...]] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.pedge)

    def keys(self) -> list[K]:
        return list(self.pedge)


def check_tree(tree: Tree) -> None:
    """Raise ``UsageError`` unless ``tree`` is a rooted tree with bijective labels."""
    n = tree.n
    if not (0 <= tree.root < n) or tree.parent[tree.root] != NO_PARENT:
        raise_usage_error("root is not a parentless process", {"root": tree.root})
    orphans = [p for p in range(n) if p != tree.root and tree.parent[p] == NO_PARENT]
    if orphans:
        raise_usage_error("process without parent edge", {"processes": orphans})
    labels = sorted(tree.label[p] for p in range(n) if p != tree.root)
    if labels != list(range(1, n)):
        raise_usage_error("edge labels are not a bijection onto 1..n-1", {"labels": labels})
    for p in range(n):
        seen = set()
        q = p
        while q != tree.root:
            if q in seen:
                raise_usage_error("parent relation has a cycle", {"process": p})
            seen.add(q)
            q = tree.parent[q]


def validate_tca(arch: Sequence[frozenset[int]], tree: Tree) -> ValidationReport:
    """
    Check the three conditions of a tree-like communication architecture.

    Args:
        arch: Members per channel
        tree: Spanning tree over the same processes

    Returns:
        Report listing every violated condition (empty when valid)

    Raises:
        UsageError: If a channel names a process outside the tree
    """
    n = tree.n
    for c, members in enumerate(arch):
        outside = sorted(p for p in members if not 0 <= p < n)
        if outside:
            raise_usage_error(
                "channel members outside the process universe",
                {"channel": c, "processes": outside},
            )

    violations: list[Violation] = []
    for c, members in enumerate(arch):
        if len(members) < 2:
            violations.append(Violation(condition=1, channel=c, witness=tuple(sorted(members))))
    for c, members in enumerate(arch):
        if len(members) < 2:
            continue
        parts = sorted(
            (sorted(part) for part in nx.connected_components(tree.graph.subgraph(members))),
            key=lambda part: part[0],
        )
        if len(parts) > 1:
            violations.append(
                Violation(condition=2, channel=c, witness=(parts[0][0], parts[1][0]))
            )
    for up, down, lab in tree.edges():
        if not any(up in ms and down in ms for ms in arch):
            violations.append(Violation(condition=3, edge=lab, witness=(up, down)))
    return ValidationReport(violations=tuple(violations))


def neighborhoods(tree: Tree) -> tuple[Neighborhood, ...]:
    """Local view of the tree for every process: parent edge and child edges."""
    return tuple(
        Neighborhood(
            pedge=tree.label[p],
            cedges=frozenset(tree.label[q] for q in tree.children[p]),
        )
        for p in range(tree.n)
    )


def make_subtree(family: Mapping[K, Neighborhood]) -> SubTree[K]:
    """
    Build the tree induced by a neighborhood family over a subset of processes.

    The root is the unique member whose parent edge is nobody's child edge; its
    parent edge value is not constrained.

    Raises:
        InconsistentNeighborhoodError: Naming the failed clause
    """
    if not family:
        raise_inconsistent("empty family")
    owner: dict[int, K] = {}
    for key, nb in family.items():
        for e in nb.cedges:
            if e in owner:
                raise_inconsistent("child edge claimed by two parents", {"edge": e})
            owner[e] = key
    roots = [key for key, nb in family.items() if nb.pedge not in owner]
    if not roots:
        raise_inconsistent("no root")
    if len(roots) > 1:
        raise_inconsistent("multiple roots", {"pedges": sorted(family[r].pedge for r in roots)})
    by_pedge: dict[int, K] = {}
    for key, nb in family.items():
        if nb.pedge in by_pedge:
            raise_inconsistent("duplicated pedge", {"pedge": nb.pedge})
        by_pedge[nb.pedge] = key
    dangling = sorted(e for e in owner if e not in by_pedge)
    if dangling:
        raise_inconsistent("child edge with no process below it", {"edges": dangling})

    root = roots[0]
    parent = {key: owner[nb.pedge] for key, nb in family.items() if key != root}
    children: dict[K, list[K]] = {key: [] for key in family}
    for key, up in parent.items():
        children[up].append(key)
    seen = {root}
    stack = [root]
    while stack:
        for key in children[stack.pop()]:
            if key not in seen:
                seen.add(key)
                stack.append(key)
    if len(seen) != len(family):
        raise_inconsistent("cycle")
    return SubTree(
        root=root,
        pedge={key: nb.pedge for key, nb in family.items()},
        parent=parent,
        children={
            key: tuple(sorted(ks, key=lambda k: family[k].pedge)) for key, ks in children.items()
        },
    )


def make_tree(family: Sequence[Neighborhood]) -> Tree:
    """
    Rebuild the spanning tree from the neighborhoods of all processes.

    Raises:
        InconsistentNeighborhoodError: If the family does not describe a tree
    """
    sub = make_subtree(dict(enumerate(family)))
    n = len(family)
    if family[sub.root].pedge != ROOT_LABEL:
        raise_inconsistent("root pedge must be 0", {"pedge": family[sub.root].pedge})
    labels = sorted(nb.pedge for p, nb in enumerate(family) if p != sub.root)
    if labels != list(range(1, n)):
        raise_inconsistent("labels are not a bijection onto 1..n-1", {"labels": labels})
    parent = [NO_PARENT] * n
    for p, up in sub.parent.items():
        parent[p] = up
    return Tree(root=sub.root, parent=tuple(parent), label=tuple(nb.pedge for nb in family))


def proc_from_label(tree: Tree, e: int) -> int:
    """Process whose parent edge carries label ``e``; ``0`` names the root."""
    if not 0 <= e < tree.n:
        raise_usage_error("edge label out of range", {"label": e, "n": tree.n})
    return tree.by_label[e]


def channels_beyond(tca: Tca, p: int, e: int) -> frozenset[int]:
    """Channels ``p`` does not listen to with some member beyond edge ``e``."""
    region = tca.tree.beyond(p, e)
    return frozenset(
        c for c, ms in enumerate(tca.arch) if p not in ms and not ms.isdisjoint(region)
    )
