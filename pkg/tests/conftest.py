import pytest

from qaclab.corpus import make_rng

_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def rng():
    return make_rng(1234)


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line; the lines are printed again in the terminal summary."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def record(number: int, ok: bool, detail: str) -> bool:
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(line)
        lines.append(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
