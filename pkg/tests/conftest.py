import numpy as np
import pytest

from qso import zakharevich_cubic

_RESULTS = {}


def record_criterion(number, title, passed, detail=""):
    _RESULTS[number] = (passed, title, detail)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_RESULTS):
        passed, title, detail = _RESULTS[n]
        line = f"[{'PASS' if passed else 'FAIL'}] {n:>2}. {title}"
        terminalreporter.write_line(line + (f"  ({detail})" if detail else ""))


@pytest.fixture(scope="session")
def zak():
    return zakharevich_cubic()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
