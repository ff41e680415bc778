import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("bz", deadline=None, max_examples=60, derandomize=True)
settings.load_profile("bz")

ACCEPTANCE = {}


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line for an acceptance criterion."""

    def record(number, title, ok, detail=""):
        line = f"[{number:2d}] {'PASS' if ok else 'FAIL'}  {title}: {detail}"
        print(line)
        ACCEPTANCE[number] = line
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.write_sep("=", "acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
