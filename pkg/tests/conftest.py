import numpy as np
import pytest

from codnopt import Branch, Bus, FeederNetwork, bundled_path, load_scenario


def random_tree(n: int, rng: np.random.Generator) -> FeederNetwork:
    """Random radial feeder: each bus hangs off a lower-numbered one."""
    parents = [int(rng.integers(0, i)) for i in range(1, n)]
    branches = [Branch(p, i, float(rng.uniform(1e-3, 5e-2)), float(rng.uniform(1e-3, 5e-2)))
                for i, p in zip(range(1, n), parents)]
    return FeederNetwork([Bus(i) for i in range(n)], branches)


def path_feeder(n: int, r: float = 0.01, x: float = 0.02) -> FeederNetwork:
    return FeederNetwork([Bus(i) for i in range(n)], [Branch(i, i + 1, r, x) for i in range(n - 1)])


@pytest.fixture(scope="session")
def tiny2():
    return load_scenario(bundled_path("tiny2.json"))


@pytest.fixture(scope="session")
def feeder12():
    return load_scenario(bundled_path("feeder12.json"))


# one line per acceptance criterion, printed at the end of the session
CRITERIA: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for k in sorted(CRITERIA):
            terminalreporter.write_line(CRITERIA[k])
