import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def normalized(rng, rows, cols):
    P = rng.uniform(0.1, 1.0, size=(rows, cols))
    return P / P.sum(axis=0)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[key])
