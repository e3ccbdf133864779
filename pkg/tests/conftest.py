import math

import numpy as np
import pytest

from bellcat import Direction

HALF = math.pi / 2
QUARTER = math.pi / 4


def random_direction(rng):
    # uniform on the sphere
    return Direction(math.acos(rng.uniform(-1.0, 1.0)), rng.uniform(0.0, 2 * math.pi))


def equator(phi):
    return Direction(HALF, phi)


@pytest.fixture
def rng(request):
    # per-test stream so adding tests never shifts another test's draws
    seed = sum(map(ord, request.node.name)) + 20240611
    return np.random.default_rng(seed)


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
