"""Shared fixtures: the five-process architecture and its two reconfigurations."""

from pathlib import Path

import pytest

from tcadist.core.topology import Tca, Tree

GOLDEN = Path(__file__).parent / "golden"

# p1..p5 and c1..c3 as dense ids
P1, P2, P3, P4, P5 = range(5)
C1, C2, C3 = range(3)

FIVE_EDGES = [(P1, P2, 1), (P1, P3, 2), (P3, P4, 3), (P3, P5, 4)]


def five_process_tca(c1: set[int], c2: set[int], c3: set[int]) -> Tca:
    tree = Tree.from_edges(5, P1, FIVE_EDGES)
    return Tca(arch=(frozenset(c1), frozenset(c2), frozenset(c3)), tree=tree)


@pytest.fixture
def base_tca() -> Tca:
    """c1 = {p1,p2,p3}, c2 = {p1,p3,p4}, c3 = {p3,p5}, rooted at p1."""
    return five_process_tca({P1, P2, P3}, {P1, P3, P4}, {P3, P5})


@pytest.fixture
def joined_tca() -> Tca:
    """Result of p2 joining c2."""
    return five_process_tca({P1, P2, P3}, {P1, P2, P3, P4}, {P3, P5})


@pytest.fixture
def split_tca() -> Tca:
    """Result of p3 leaving c1; c1 and c3 no longer share a process."""
    return five_process_tca({P1, P2}, {P1, P3, P4}, {P3, P5})


@pytest.fixture
def golden_dir() -> Path:
    return GOLDEN


def pytest_addoption(parser):
    parser.addoption(
        "--runslow", action="store_true", default=False, help="run the full-scale suites"
    )


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)
