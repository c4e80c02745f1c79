import pytest

from gpsparsify.mc import McConfig


@pytest.fixture
def cfg():
    return McConfig(n_samples=20_000, seed=11)


def within(est, target, k=3.0):
    """``|value - target| <= k std_err`` for an Estimate or a CheckReport."""
    value = est.measured if hasattr(est, "measured") else est.mean
    return abs(value - target) <= k * est.std_err


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
