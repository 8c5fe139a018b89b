"""Tests for local states, synchronization data and the distributed automaton."""

import itertools
from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tcadist.core.distribution import (
    Sync,
    SyncCD,
    SyncEntry,
    accept_data,
    architecture_of,
    build_sync,
    consistent,
    distribute,
    encode_local_state,
    encoded_size_bits,
    global_state,
    initial_local_state,
    local_state_for,
    local_step,
    propose_data,
    size_bound_bits,
    specialize_fixed,
    state_from_sync,
    well_formed,
)
from tcadist.core.errors import BlockedError, DiamondViolationError, TcaError, UsageError
from tcadist.core.harness import GenSpec, counter_product, gen_dfa, tca_tracker
from tcadist.core.raa import accepts, initial_state, run_word, step
from tcadist.core.reconfig import OP_KINDS, Action, Disc, Nop, Swap, apply
from tcadist.core.rldfa import Config, advance, diam, from_table, run
from tcadist.core.topology import Tca, Tree
from tests.conftest import C1, C2, C3, P1, P2, P3, P4, P5


def nop_parity(tca):
    return counter_product(tca, [2] * tca.k, kinds=["nop"], name="parity")


def initial_locals(dfa):
    return [initial_local_state(dfa, p) for p in range(dfa.arch0.n)]


@pytest.fixture
def chain_tca() -> Tca:
    """p1 - p2 - p3 with p4 under p1; c1 = {p1,p2,p3}, c2 = {p2,p3}, c3 = {p1,p4}."""
    tree = Tree.from_edges(4, 0, [(0, 1, 1), (1, 2, 2), (0, 3, 3)])
    return Tca(arch=(frozenset({0, 1, 2}), frozenset({1, 2}), frozenset({0, 3})), tree=tree)


def test_initial_local_state_inner(base_tca):
    """Test the initial state of p3."""
    dfa = nop_parity(base_tca)
    ls = initial_local_state(dfa, P3)
    assert ls.s1 == ls.s2 == dfa.s0
    assert ls.listening == frozenset({C1, C2, C3})
    assert (ls.pedge, ls.cedges) == (2, frozenset({3, 4}))
    assert dict(ls.cc) == {2: {C1, C2}, 3: {C2}, 4: {C3}}
    assert dict(ls.dc) == {2: set(), 3: set(), 4: set()}


def test_initial_local_state_leaf(base_tca):
    """Test the initial state of p5."""
    ls = initial_local_state(nop_parity(base_tca), P5)
    assert ls.listening == frozenset({C3})
    assert (ls.pedge, ls.cedges) == (4, frozenset())
    assert dict(ls.cc) == {4: {C3}}
    assert dict(ls.dc) == {4: {C1, C2}}


def test_initial_local_state_root(base_tca):
    """Test the initial state of the root p1."""
    ls = initial_local_state(nop_parity(base_tca), P1)
    assert ls.pedge == 0
    assert ls.cc_at(0) == ls.dc_at(0) == frozenset()
    assert ls.dc_at(2) == frozenset({C3})
    assert ls.dc_at(1) == frozenset()


def test_initial_locals_are_well_formed(base_tca):
    """Test well-formedness of every initial local state."""
    assert all(well_formed(ls, 3) for ls in initial_locals(nop_parity(base_tca)))


def test_build_sync_binary_channel(base_tca):
    """Test canonical data on c3."""
    dfa = nop_parity(base_tca)
    entries = build_sync(initial_locals(dfa), C3)
    assert entries == (
        SyncEntry(dfa.s0, dfa.s0, 2, frozenset({4}), frozenset()),
        SyncEntry(dfa.s0, dfa.s0, 4, frozenset(), frozenset()),
    )


def test_build_sync_three_listeners(base_tca):
    """Test canonical data on c1."""
    entries = build_sync(initial_locals(nop_parity(base_tca)), C1)
    assert [e.pedge for e in entries] == [0, 1, 2]
    assert entries[0].cedges == frozenset({1, 2})
    assert entries[2].channels == frozenset({C3})


def test_consistency(base_tca):
    """Test that canonical data is consistent with every participant and corruptions are not."""
    locals_ = initial_locals(nop_parity(base_tca))
    entries = build_sync(locals_, C1)
    for p in (P1, P2, P3):
        assert consistent(entries, locals_[p], C1)
    assert not consistent(entries, locals_[P4], C1)
    duplicated = entries + (entries[1],)
    assert not consistent(duplicated, locals_[P2], C1)
    wrong = (entries[0], entries[1], replace(entries[2], channels=frozenset()))
    assert not consistent(wrong, locals_[P1], C1)


def test_state_at_time_zero(base_tca):
    """Test that identical initial entries describe the initial state."""
    dfa = nop_parity(base_tca)
    locals_ = initial_locals(dfa)
    for c in (C1, C2, C3):
        assert state_from_sync(dfa, build_sync(locals_, c)) == dfa.s0


def test_nop_step_on_binary_channel(base_tca):
    """Test that the subtree root keeps its parent view while the child takes both."""
    dfa = nop_parity(base_tca)
    locals_ = initial_locals(dfa)
    a = Action(C3, Nop())
    data = propose_data(locals_, a)
    reached = dfa.delta(dfa.s0, a)
    top = local_step(dfa, locals_[P3], data, a, 3)
    leaf = local_step(dfa, locals_[P5], data, a, 3)
    assert (top.s1, top.s2) == (dfa.s0, reached)
    assert (leaf.s1, leaf.s2) == (reached, reached)


def test_swap_step_for_lower_process(chain_tca):
    """Test the swap row of the process moving up."""
    dfa = tca_tracker(chain_tca, ["nop", "swap"])
    locals_ = initial_locals(dfa)
    a = Action(1, Swap(2))
    data = propose_data(locals_, a)
    assert isinstance(data, SyncCD)
    assert (data.cc, data.dc) == (frozenset({0}), frozenset({2}))
    moved = local_step(dfa, locals_[2], data, a, 3)
    after = apply(chain_tca, a)
    expected = local_state_for(after, 2, dfa.s0, after)
    assert moved == expected


def test_swap_step_for_upper_process(chain_tca):
    """Test the swap row of the process moving down."""
    dfa = tca_tracker(chain_tca, ["nop", "swap"])
    locals_ = initial_locals(dfa)
    a = Action(1, Swap(2))
    moved = local_step(dfa, locals_[1], propose_data(locals_, a), a, 3)
    after = apply(chain_tca, a)
    assert moved == local_state_for(after, 1, after, after)


def test_disc_step_for_leaving_process(base_tca):
    """Test the disconnect row of the leaving process."""
    dfa = tca_tracker(base_tca, ["nop", "disc"])
    locals_ = initial_locals(dfa)
    a = Action(C1, Disc(2))
    moved = local_step(dfa, locals_[P3], propose_data(locals_, a), a, 3)
    assert moved.listening == frozenset({C2, C3})
    assert moved.cc_at(2) == frozenset({C2})
    assert moved.dc_at(2) == frozenset({C1})


def test_wrong_data_kind_blocks(base_tca):
    """Test that a swap with plain sync data blocks."""
    dfa = tca_tracker(base_tca, ["nop", "swap"])
    locals_ = initial_locals(dfa)
    a = Action(C1, Swap(1))
    with pytest.raises(BlockedError):
        local_step(dfa, locals_[P1], Sync(build_sync(locals_, C1)), a, 3)


def test_accept_data_initial(base_tca):
    """Test the global candidate of the initial state."""
    dfa = nop_parity(base_tca)
    locals_ = initial_locals(dfa)
    candidate = accept_data(locals_, 3)
    assert candidate is not None
    assert [e.pedge for e in candidate.entries] == [0, 1, 2, 3, 4]
    assert global_state(dfa, locals_, 3) == dfa.s0
    assert architecture_of(locals_, 3) == base_tca


def test_accept_data_corrupted(base_tca):
    """Test that a corrupted dc entry removes the candidate."""
    locals_ = initial_locals(nop_parity(base_tca))
    locals_[P1] = replace(locals_[P1], dc=((1, frozenset()), (2, frozenset())))
    assert accept_data(locals_, 3) is None


def test_size_bound_initial(base_tca):
    """Test that initial local states fit the size bound."""
    dfa = nop_parity(base_tca)
    for ls in initial_locals(dfa):
        assert encoded_size_bits(ls, 5, 3, 1, {dfa.s0: 0}) <= size_bound_bits(5, 3, 1)


def test_encoding_length_of_well_formed_states(base_tca):
    """Test the encoded width of initial states from their incident edges."""
    dfa = nop_parity(base_tca)
    for ls in initial_locals(dfa):
        expected = 2 * 1 + 3 + (5).bit_length() + 5 + 2 * 3 * len(ls.pcedges)
        assert encoded_size_bits(ls, 5, 3, 1, {dfa.s0: 0}) == expected


def test_encoding_layout_of_root(base_tca):
    """Test the bit layout of the root's initial state."""
    dfa = nop_parity(base_tca)
    root = initial_locals(dfa)[P1]
    bits = encode_local_state(root, 5, 3, 1, {dfa.s0: 0})
    assert bits[:2] == "00"
    assert bits[2:5] == "110"
    assert bits[5:8] == "000"
    assert bits[8:13] == "01100"


def test_encoding_counts_stray_entries(base_tca):
    """Test that a map entry on a non-incident edge takes label and mask bits."""
    dfa = nop_parity(base_tca)
    ls = initial_locals(dfa)[P2]
    index = {dfa.s0: 0}
    extra = replace(ls, dc=ls.dc + ((3, frozenset({C3})),))
    assert encoded_size_bits(extra, 5, 3, 1, index) == encoded_size_bits(ls, 5, 3, 1, index) + 9


def test_encoding_widens_for_unknown_states(base_tca):
    """Test that a state outside the index gets a wider fresh index."""
    dfa = nop_parity(base_tca)
    ls = initial_locals(dfa)[P2]
    index = {dfa.s0: 0, "other": 1}
    stranger = replace(ls, s2="stranger")
    assert encoded_size_bits(stranger, 5, 3, 1, index) == encoded_size_bits(ls, 5, 3, 1, index) + 1


def test_bloated_state_exceeds_bound(base_tca):
    """Test that a state carrying many stale edge entries breaks the size bound."""
    dfa = nop_parity(base_tca)
    ls = initial_locals(dfa)[P1]
    stale = tuple((e, frozenset({C1, C2, C3})) for e in range(5, 13))
    bloated = replace(ls, cc=ls.cc + stale)
    assert encoded_size_bits(bloated, 5, 3, 1, {dfa.s0: 0}) > size_bound_bits(5, 3, 1)


def test_distribute_rejects_non_closed(split_tca):
    """Test that a diamond violation is reported with its counterexample."""
    nop1, nop3 = Action(C1, Nop()), Action(C3, Nop())
    dfa = from_table(split_tca, "s0", {("s0", nop1): "s1", ("s1", nop3): "s2"}, ["s2"])
    with pytest.raises(DiamondViolationError) as exc:
        distribute(dfa)
    assert exc.value.details["state"] == "'s0'"


def test_distributed_language_matches(split_tca):
    """Test that the distributed automaton accepts exactly the centralized language."""
    dfa = nop_parity(split_tca)
    raa = distribute(dfa)
    letters = [Action(c, Nop()) for c in range(3)]
    for length in range(5):
        for word in itertools.product(letters, repeat=length):
            result = run_word(raa, word)
            accepted = result.defined and accepts(raa, result.last).accepted
            assert accepted == (run(dfa, word).defined and dfa.is_final(run(dfa, word).last.state))


def test_empty_language():
    """Test that an automaton without final states stays empty when distributed."""
    tree = Tree.from_edges(3, 0, [(0, 1, 1), (1, 2, 2)])
    tca = Tca(arch=(frozenset({0, 1}), frozenset({1, 2})), tree=tree)
    dfa = counter_product(tca, [2, 2], finals=[], kinds=["nop"])
    raa = distribute(dfa)
    letters = [Action(c, Nop()) for c in range(2)]
    for length in range(5):
        for word in itertools.product(letters, repeat=length):
            result = run_word(raa, word)
            assert result.defined
            assert not accepts(raa, result.last).accepted


def test_specialize_fixed_matches_distribute(split_tca):
    """Test that keeping only state pairs accepts the same nop words."""
    dfa = nop_parity(split_tca)
    full = distribute(dfa, verify=False)
    fixed = specialize_fixed(dfa)
    assert initial_state(fixed) == ((dfa.s0, dfa.s0),) * 5
    letters = [Action(c, Nop()) for c in range(3)]
    for length in range(6):
        for word in itertools.product(letters, repeat=length):
            left = run_word(full, word)
            right = run_word(fixed, word)
            assert left.defined == right.defined
            assert accepts(full, left.last).accepted == accepts(fixed, right.last).accepted


def test_specialize_fixed_binary_update():
    """Test that a two-process channel updates by a single diam."""
    tree = Tree.from_edges(2, 0, [(0, 1, 1)])
    tca = Tca(arch=(frozenset({0, 1}),), tree=tree)
    dfa = counter_product(tca, [3], kinds=["nop"])
    fixed = specialize_fixed(dfa)
    nop = Action(0, Nop())
    before = run_word(fixed, [nop] * 3).last
    (_, root_s2), (child_s1, child_s2) = before
    combined = diam(dfa, child_s1, root_s2, child_s2, frozenset())
    result = run_word(fixed, [nop] * 4)
    assert result.defined
    assert result.last[0][1] == dfa.delta(combined, nop)
    assert result.last[1] == (dfa.delta(combined, nop), dfa.delta(combined, nop))
    assert result.last == ((dfa.s0, (tca, (1,))), ((tca, (1,)), (tca, (1,))))


def test_specialize_fixed_rejects_reconfiguration(chain_tca):
    """Test that a reachable swap transition is rejected."""
    with pytest.raises(UsageError):
        specialize_fixed(tca_tracker(chain_tca, ["nop", "swap"]))


def assert_same_language(dfa, raa, max_len):
    """Walk both automata over every word up to ``max_len``, merging revisited pairs."""
    frontier = {(Config(dfa.s0, dfa.arch0), initial_state(raa))}
    seen = set(frontier)
    for depth in range(max_len + 1):
        following = set()
        for config, g in frontier:
            assert accepts(raa, g).accepted == dfa.is_final(config.state), (config, depth)
            if depth == max_len:
                continue
            for a in dfa.alphabet:
                nxt = advance(dfa, config, a)[0]
                try:
                    moved = step(raa, g, raa.propose_data(g, a), a)
                except TcaError:
                    moved = None
                if nxt is None:
                    assert moved is None or not accepts(raa, moved).accepted, (config, a)
                    continue
                assert moved is not None, (config, a)
                pair = (nxt, tuple(moved))
                if pair not in seen:
                    seen.add(pair)
                    following.add(pair)
        frontier = following


def test_language_with_reconfiguration_letters():
    """Test language equality over words of every operation kind on three processes."""
    for seed, family in ((2, "parity"), (5, "tracker"), (7, "custom")):
        dfa = gen_dfa(GenSpec(n=3, k=2, seed=seed, family=family, ops=OP_KINDS))
        assert_same_language(dfa, distribute(dfa), 4)


@pytest.mark.slow
@settings(max_examples=20, deadline=None)
@given(
    n=st.integers(min_value=2, max_value=4),
    k=st.integers(min_value=1, max_value=3),
    seed=st.integers(min_value=0, max_value=100_000),
    family=st.sampled_from(["tracker", "parity", "custom"]),
)
def test_language_up_to_length_six(n, k, seed, family):
    """Test language equality over every word of length up to six."""
    dfa = gen_dfa(GenSpec(n=n, k=k, seed=seed, family=family, ops=OP_KINDS))
    assert_same_language(dfa, distribute(dfa, verify=False), 6)
