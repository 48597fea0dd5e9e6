import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

# criterion number -> list of (passed, detail); a criterion passes when all its parts do
ACCEPTANCE = {}


def acceptance_line(n):
    parts = ACCEPTANCE[n]
    ok = all(p for p, _ in parts)
    return f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  " + "; ".join(d for _, d in parts)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(acceptance_line(n))


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def criterion():
    """Record the pass/fail line of one acceptance criterion."""

    def record(n, passed, detail):
        ACCEPTANCE.setdefault(n, []).append((bool(passed), detail))
        print(acceptance_line(n))
        return passed

    return record
