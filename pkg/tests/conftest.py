import pytest

_RESULTS = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_RESULTS] = {}


@pytest.fixture
def criterion(request):
    """Record a PASS/FAIL line for an acceptance criterion: ``criterion(n, name, ok, detail)``."""
    results = request.config.stash[_RESULTS]

    def record(number: int, name: str, ok: bool, detail: str = ""):
        results[number] = (name, ok, detail)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(_RESULTS, {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        name, ok, detail = results[number]
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {name}"
        if detail:
            line += f" ({detail})"
        terminalreporter.write_line(line)
