import numpy as np
import pytest

from unseen.histogram import CountHistogram

TABLE1_PREFIX = "1 603776\n2 73628\n3 14113\n"


@pytest.fixture
def chao_hist():
    return CountHistogram.from_mapping({1: 100, 2: 50})


@pytest.fixture
def table1_prefix():
    return CountHistogram.from_mapping({1: 603776, 2: 73628, 3: 14113})


def atom_moments(points, weights, count):
    """Moments sum(w x^m), m < count, of a discrete measure."""
    x = np.asarray(points, dtype=float)
    w = np.asarray(weights, dtype=float)
    return [float(np.sum(w * x**m)) for m in range(count)]


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def verdict():
    """Record one pass/fail line per acceptance criterion, then assert it."""

    def record(number: int, ok: bool, detail: str):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
