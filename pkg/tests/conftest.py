import sys

import numpy as np
import pytest

from eatup.models import (
    CounterexampleParams,
    GrowthParams,
    counterexample_problem,
    growth_problem,
)


@pytest.fixture
def growth():
    return growth_problem(GrowthParams(alpha=0.5, beta=0.9, k0=0.25))


@pytest.fixture
def growth_b1():
    return growth_problem(GrowthParams(alpha=0.5, beta=1.0, k0=0.25))


@pytest.fixture
def counterexample():
    return counterexample_problem(CounterexampleParams(a=2.0, b=3.0))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = mod.summary_lines() if mod is not None else []
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
