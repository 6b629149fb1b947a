import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")
SHARED_IMAGES = [
    os.path.join(DATA_DIR, "shared", name)
    for name in ("gradient.png", "checker.png", "noise.png")
]


@pytest.fixture(scope="session")
def data_dir():
    return DATA_DIR


@pytest.fixture(scope="session")
def shared_images():
    for path in SHARED_IMAGES:
        assert os.path.isfile(path), path
    return SHARED_IMAGES


def random_directions(n, seed=0):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=(n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# One visible pass/fail line per acceptance criterion at the end of the run.
_acceptance_results = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        _acceptance_results.append((name, report.outcome))


def pytest_terminal_summary(terminalreporter):
    if _acceptance_results:
        terminalreporter.write_line("")
        terminalreporter.write_line("acceptance criteria:")
        for name, outcome in _acceptance_results:
            terminalreporter.write_line(f"  {name}: {outcome.upper()}")
