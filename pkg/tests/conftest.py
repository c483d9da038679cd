import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mhr_acl.kernel import Event, fire
from mhr_acl.state import Consumer, Operator, Provider, RecordCategory, Universe, initial_state

G = RecordCategory.GENERAL
R = RecordCategory.RESTRICTED
H = RecordCategory.HIDDEN

_ACCEPTANCE_LINES: list = []


def ev(name, *args):
    return Event(name, tuple(args))


def C(x):
    return Consumer(x)


def P(x):
    return Provider(x)


def O(x):
    return Operator(x)


def play(s, *events):
    for e in events:
        s = fire(s, e)
    return s


@pytest.fixture
def s0():
    """Empty system over 3 people, 3 spaces, 3 records, 2 providers, 1 operator."""
    u, ops = Universe.of_sizes(3, 3, 3, 2, 1)
    return initial_state(u, ops)


@pytest.fixture
def two_consumers(s0):
    """p1 and p2 registered, sp1 registered, p1 owns general r1."""
    return play(
        s0,
        ev("register_consumer", "p1", "m1"),
        ev("register_consumer", "p2", "m2"),
        ev("register_service_provider", "sp1"),
        ev("upload_record", C("p1"), "p1", "r1", G),
    )


@pytest.fixture
def acceptance_log():
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
