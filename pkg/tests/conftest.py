import numpy as np
import pytest

from pathrisk import Scenario, benchmark_paths

BENCH_SIGMAS = tuple(float(s) for s in np.logspace(-3, 0, 10))


@pytest.fixture(scope="session")
def paths():
    return benchmark_paths()


def scenario(traj, sigma, radius=0.1, mean=(2.5, 0.0)):
    return Scenario.isotropic(traj, mean, radius, sigma)


# One line per acceptance criterion, echoed at the end of the run.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
