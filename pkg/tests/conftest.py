import pytest

from pulltab import load_program

FLIP = """\
-- the coin-flipping example
data Bit = 0 | 1
flip 0 = 1
flip 1 = 0
coin = 0 ? 1
main = (flip x, flip x) where x = coin
"""

# one line per acceptance criterion, echoed in the terminal summary
CRITERIA_LINES = []


def pytest_terminal_summary(terminalreporter):
    if CRITERIA_LINES:
        terminalreporter.section("acceptance criteria")
        for line in CRITERIA_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def flip_text():
    return FLIP


@pytest.fixture
def flip():
    return load_program(FLIP)
