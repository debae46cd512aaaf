import numpy as np
import pytest

from switchstab.instances import prop_different_3d, stanford_urbano, stanford_urbano_bar

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def acceptance():
    """Record one pass/fail line per criterion, then assert it."""

    def record(number: int, checks: list[tuple[str, bool]]):
        ok = all(passed for _, passed in checks)
        detail = "; ".join(f"{text} [{'ok' if passed else 'FAILED'}]" for text, passed in checks)
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'} | {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


@pytest.fixture(scope="session")
def su():
    return stanford_urbano().matrix_set


@pytest.fixture(scope="session")
def su_bar():
    return stanford_urbano_bar().matrix_set


@pytest.fixture(scope="session")
def pd3():
    return prop_different_3d().matrix_set


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
