import random

import pytest

from zerosum_khintchine.weights import random_rational_weights


@pytest.fixture
def rng():
    return random.Random(20261015)


@pytest.fixture
def random_weights(rng):
    def make(N):
        return random_rational_weights(rng, N)

    return make


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
