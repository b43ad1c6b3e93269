import re
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))  # make `oracles` importable


def pytest_runtest_logreport(report):
    """Emit the acceptance FAIL lines (PASS lines print inside the tests)."""
    if report.when != "call" or not report.failed:
        return
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)", report.nodeid)
    if m:
        name = m.group(2).replace("_", " ")
        print(f"\n[acceptance] criterion {m.group(1)} ({name}): FAIL")


@pytest.fixture
def rng():
    return np.random.default_rng(20120)


def random_mask(rng, h, w, p=0.5):
    return rng.random((h, w)) < p


def random_gray(rng, h, w):
    return rng.integers(0, 256, size=(h, w), dtype=np.uint8)


def nonempty_mask(rng, h, w, p=0.5):
    m = random_mask(rng, h, w, p)
    if not m.any():
        m[int(rng.integers(0, h)), int(rng.integers(0, w))] = True
    return m
