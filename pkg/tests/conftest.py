import sys

import numpy as np
import pytest

from polyclust import Dataset
from polyclust.synth import blobs, minmax


@pytest.fixture
def two_blobs():
    X, y = blobs(2, 40, sep=10, seed=3)
    return Dataset.from_arrays(minmax(X)), y


@pytest.fixture
def three_blobs():
    X, y = blobs(3, 60, sep=10, seed=5)
    return Dataset.from_arrays(minmax(X)), y


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
