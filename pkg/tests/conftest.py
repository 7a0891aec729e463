import time

import pytest

from wentropy.flow_engine import perturbed_initial_state, run_flow
from wentropy.grid import get_grid

ACCEPTANCE_LINES = []


def record(criterion, passed, detail, seconds):
    line = f"{criterion:<14} {'PASS' if passed else 'FAIL'}  {detail}  [{seconds:.1f} s]"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def _timed_flow(nodes, dt, epsilon, fT_epsilon):
    t0 = time.perf_counter()
    traj = run_flow(perturbed_initial_state(epsilon, get_grid(nodes)), 1.0, dt, epsilon=fT_epsilon)
    return traj, time.perf_counter() - t0


@pytest.fixture(scope="session")
def round_run():
    return _timed_flow(128, 5e-4, 0.0, 0.0)


@pytest.fixture(scope="session")
def perturbed_run():
    return _timed_flow(128, 5e-4, 0.05, 0.1)


@pytest.fixture(scope="session")
def fine_run():
    return _timed_flow(256, 2.5e-4, 0.05, 0.1)


@pytest.fixture(scope="session")
def perturbed(perturbed_run):
    return perturbed_run[0]


@pytest.fixture(scope="session")
def second_report(perturbed):
    from wentropy.entropy_lab import second_variation_report

    t0 = time.perf_counter()
    rep = second_variation_report(perturbed)
    return rep, time.perf_counter() - t0


@pytest.fixture(scope="session")
def flow_identities(perturbed):
    from wentropy.identity_bench import run_flow_identities

    return run_flow_identities(perturbed)


@pytest.fixture(scope="session")
def fine_identities(fine_run):
    from wentropy.identity_bench import run_flow_identities

    return run_flow_identities(fine_run[0])
