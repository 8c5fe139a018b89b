"""Tests for trees, neighborhoods and the TCA conditions."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tcadist.core.errors import InconsistentNeighborhoodError, UsageError
from tcadist.core.harness import GenSpec, gen_tca
from tcadist.core.topology import (
    Neighborhood,
    Tree,
    Violation,
    channels_beyond,
    make_subtree,
    make_tree,
    neighborhoods,
    proc_from_label,
    validate_tca,
)
from tests.conftest import C1, C2, C3, P1, P2, P3, P4, P5, five_process_tca


def test_base_architecture_is_valid(base_tca):
    """Test that the five-process example satisfies all conditions."""
    report = validate_tca(base_tca.arch, base_tca.tree)
    assert report.ok
    assert report.violations == ()


def test_uncovered_edge():
    """Test that dropping p2 from c1 leaves edge 1 uncovered."""
    tca = five_process_tca({P1, P3}, {P1, P3, P4}, {P3, P5})
    report = validate_tca(tca.arch, tca.tree)
    assert report.violations == (Violation(condition=3, edge=1, witness=(P1, P2)),)


def test_disconnected_channel():
    """Test that dropping p3 from c2 splits c2 and uncovers edge 3."""
    tca = five_process_tca({P1, P2, P3}, {P1, P4}, {P3, P5})
    report = validate_tca(tca.arch, tca.tree)
    assert [v.condition for v in report.violations] == [2, 3]
    assert report.violations[0] == Violation(condition=2, channel=C2, witness=(P1, P4))
    assert report.violations[1].edge == 3


def test_small_channel():
    """Test that a channel with one listener violates the first condition."""
    tca = five_process_tca({P1, P2, P3}, {P1, P3, P4}, {P3})
    conditions = {v.condition for v in validate_tca(tca.arch, tca.tree).violations}
    assert 1 in conditions
    assert 3 in conditions


def test_member_outside_universe():
    """Test that channel members must be processes of the tree."""
    tree = Tree.from_edges(2, 0, [(0, 1, 1)])
    with pytest.raises(UsageError):
        validate_tca((frozenset({0, 7}),), tree)


def test_neighborhoods(base_tca):
    """Test neighborhoods of the five-process tree."""
    assert neighborhoods(base_tca.tree) == (
        Neighborhood(0, frozenset({1, 2})),
        Neighborhood(1),
        Neighborhood(2, frozenset({3, 4})),
        Neighborhood(3),
        Neighborhood(4),
    )


def test_neighborhoods_single_node():
    """Test that a lone root has parent edge 0 and no children."""
    assert neighborhoods(Tree.from_edges(1, 0, [])) == (Neighborhood(0),)


def test_neighborhoods_chain():
    """Test a chain r - a - b."""
    tree = Tree.from_edges(3, 0, [(0, 1, 1), (1, 2, 2)])
    assert neighborhoods(tree) == (
        Neighborhood(0, frozenset({1})),
        Neighborhood(1, frozenset({2})),
        Neighborhood(2),
    )


def test_make_tree_round_trip(base_tca):
    """Test that neighborhoods determine the tree."""
    assert make_tree(neighborhoods(base_tca.tree)) == base_tca.tree


def test_make_tree_two_nodes():
    """Test the smallest tree with an edge."""
    tree = make_tree([Neighborhood(0, frozenset({1})), Neighborhood(1)])
    assert tree.root == 0
    assert tree.parent == (-1, 0)
    assert tree.label == (0, 1)


@pytest.mark.parametrize(
    "family,clause",
    [
        ([Neighborhood(0), Neighborhood(0)], "multiple roots"),
        ([Neighborhood(0, frozenset({1})), Neighborhood(1), Neighborhood(1)], "duplicated pedge"),
        ([Neighborhood(0, frozenset({1, 2})), Neighborhood(1)], "child edge with no process below it"),
        ([Neighborhood(1, frozenset({2})), Neighborhood(2, frozenset({1}))], "no root"),
        (
            [Neighborhood(0, frozenset({1})), Neighborhood(1), Neighborhood(2, frozenset({1}))],
            "child edge claimed by two parents",
        ),
    ],
)
def test_make_tree_rejects(family, clause):
    """Test that inconsistent families name the failed clause."""
    with pytest.raises(InconsistentNeighborhoodError) as exc:
        make_tree(family)
    assert exc.value.message == clause


def test_make_tree_cycle():
    """Test that a cycle detached from the root is rejected."""
    family = [
        Neighborhood(0),
        Neighborhood(1, frozenset({2})),
        Neighborhood(2, frozenset({1})),
    ]
    with pytest.raises(InconsistentNeighborhoodError) as exc:
        make_tree(family)
    assert exc.value.message == "cycle"


def test_make_subtree_partial_family():
    """Test the subtree variant on a subset of processes."""
    sub = make_subtree({"x": Neighborhood(2, frozenset({3})), "y": Neighborhood(3)})
    assert sub.root == "x"
    assert sub.parent == {"y": "x"}
    assert sub.children == {"x": ("y",), "y": ()}


def test_proc_from_label(base_tca):
    """Test label lookup on the five-process tree."""
    assert proc_from_label(base_tca.tree, 0) == P1
    assert proc_from_label(base_tca.tree, 3) == P4
    assert proc_from_label(base_tca.tree, 2) == P3


def test_neighborhood_rejects_repeated_edge():
    """Test that the parent edge cannot also be a child edge."""
    with pytest.raises(UsageError):
        Neighborhood(2, frozenset({2}))


def test_tree_helpers(base_tca):
    """Test subtree, beyond and depth."""
    tree = base_tca.tree
    assert tree.subtree(P3) == frozenset({P3, P4, P5})
    assert tree.beyond(P3, 2) == frozenset({P1, P2})
    assert tree.beyond(P1, 2) == frozenset({P3, P4, P5})
    assert tree.depth(P5) == 2
    assert tree.pcedges(P1) == frozenset({1, 2})
    assert tree.pcedges(P3) == frozenset({2, 3, 4})


def test_channels_beyond(base_tca):
    """Test unheard channels located beyond an edge."""
    assert channels_beyond(base_tca, P5, 4) == frozenset({C1, C2})
    assert channels_beyond(base_tca, P1, 2) == frozenset({C3})
    assert channels_beyond(base_tca, P1, 1) == frozenset()


def test_tree_from_edges_rejects_bad_labels():
    """Test that labels must be a bijection onto 1..n-1."""
    with pytest.raises(UsageError):
        Tree.from_edges(3, 0, [(0, 1, 1), (0, 2, 3)])


@settings(max_examples=25, deadline=None)
@given(
    n=st.integers(min_value=2, max_value=7),
    k=st.integers(min_value=1, max_value=4),
    seed=st.integers(min_value=0, max_value=10_000),
)
def test_generated_trees_round_trip(n, k, seed):
    """Test the round trip and label bijection on generated trees."""
    tree = gen_tca(GenSpec(n=n, k=k, seed=seed)).tree
    assert make_tree(neighborhoods(tree)) == tree
    assert sorted(proc_from_label(tree, e) for e in range(n)) == list(range(n))


def test_listening_and_shared(base_tca):
    """Test channel lookups per process."""
    assert base_tca.listening(P3) == frozenset({C1, C2, C3})
    assert base_tca.shared(P1, P3) == frozenset({C1, C2})
    assert base_tca.shared(P2, P5) == frozenset()
