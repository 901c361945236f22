from __future__ import annotations

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("mixmorrey", max_examples=25, deadline=None)
settings.load_profile("mixmorrey")


def indicator(a: float, b: float):
    return lambda x: ((x > a) & (x < b)).astype(float)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


#: ``(criterion, passed, detail)`` lines collected by the acceptance suite.
ACCEPTANCE_LINES: list[tuple[int, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for num, ok, detail in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
