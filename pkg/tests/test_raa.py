"""Tests for RAA steps, runs and acceptance."""

import itertools

import pytest

from tcadist.core.errors import BlockedError, ChannelDeadError
from tcadist.core.raa import (
    Raa,
    accepts,
    initial_state,
    listeners,
    parity_example,
    run_with_data,
    run_word,
    step,
    table_process,
)
from tcadist.core.reconfig import Action, Nop, Swap

A, B, C = (Action(ch, Nop()) for ch in range(3))


def even_before_each_c(word):
    """Oracle: every c comes after an even number of a and of b."""
    counts = {0: 0, 1: 0}
    for a in word:
        if a.channel == 2 and (counts[0] % 2 or counts[1] % 2):
            return False
        if a.channel in counts:
            counts[a.channel] += 1
    return True


def test_step_moves_listeners():
    """Test that only listeners of the channel move."""
    raa = parity_example()
    assert step(raa, ("s1", "t1", "u1"), None, A) == ("s2", "t1", "u1")


def test_step_blocks():
    """Test that an odd number of a blocks c."""
    raa = parity_example()
    with pytest.raises(BlockedError) as exc:
        step(raa, ("s2", "t1", "u1"), None, C)
    assert exc.value.details["blockers"] == [0]


def test_channel_dead():
    """Test that a channel without listeners cannot be used."""
    p = table_process("x", {}, {"x": ()})
    raa = Raa(processes=(p,), channels=1)
    with pytest.raises(ChannelDeadError):
        step(raa, initial_state(raa), None, A)


def test_listeners():
    """Test listening sets of the parity example."""
    raa = parity_example()
    assert listeners(raa, ("s1", "t1", "u1"), 2) == [2]
    assert listeners(raa, ("s2", "t2", "u1"), 2) == [0, 1, 2]


def test_run_with_data():
    """Test runs with explicit data."""
    raa = parity_example()
    assert run_with_data(raa, []).last == initial_state(raa)
    result = run_with_data(raa, [(None, A), (None, A), (None, C)])
    assert result.defined
    assert result.last == ("s1", "t1", "u1")
    blocked = run_with_data(raa, [(None, A), (None, C)])
    assert blocked.undefined_at == 1
    assert blocked.blockers == (0,)


def test_table_process_reads_only_nops():
    """Test that table processes block on reconfiguring actions."""
    raa = parity_example()
    result = run_word(raa, [Action(0, Swap(1))])
    assert result.undefined_at == 0


def test_parity_language():
    """Test the language of the parity example against its oracle on all words up to length 8."""
    raa = parity_example()
    for length in range(9):
        for word in itertools.product((A, B, C), repeat=length):
            result = run_word(raa, word)
            accepted = result.defined and accepts(raa, result.last).accepted
            assert accepted == even_before_each_c(word), word


def test_rejecting_process():
    """Test that one never-accepting process rejects everything."""
    ok = table_process("x", {("x", 0): "x"}, {"x": {0}})
    never = table_process("y", {("y", 0): "y"}, {"y": {0}}, accepting=lambda _s, _d: False)
    raa = Raa(processes=(ok, never), channels=1)
    assert not accepts(raa, initial_state(raa)).accepted
