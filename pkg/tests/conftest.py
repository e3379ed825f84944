import sys

import numpy as np
import pytest

from smoothness_lab.core import FuncRep


@pytest.fixture
def rng():
    return np.random.default_rng(20240101)


@pytest.fixture
def poly12(rng):
    return FuncRep.jacobi(rng.standard_normal(13))


def R(n):
    return FuncRep.jacobi(np.eye(n + 1)[n])


def pytest_terminal_summary(terminalreporter):
    mod = next((m for name, m in sys.modules.items() if name.endswith("test_acceptance")), None)
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for k in sorted(results):
            terminalreporter.write_line(results[k])
