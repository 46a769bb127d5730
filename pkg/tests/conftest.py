import pytest

from growthspeed import WeightSpec, generate_cascade

_REPORT = []


@pytest.fixture
def report():
    """Record one acceptance line: report(criterion, ok, detail)."""

    def add(criterion, ok, detail=""):
        _REPORT.append((criterion, bool(ok), detail))

    return add


def pytest_terminal_summary(terminalreporter):
    if not _REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, ok, detail in sorted(_REPORT, key=lambda r: r[0]):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}")


@pytest.fixture
def quarter():
    return generate_cascade(WeightSpec.deterministic([0.25, 0.75]), 64, 0)


@pytest.fixture
def uniform():
    return generate_cascade(WeightSpec.deterministic([0.5, 0.5]), 64, 0)
