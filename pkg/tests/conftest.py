import pytest

_RESULTS: dict = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        detail = getattr(item, "criterion_detail", "")
        _RESULTS[mark.args[0]] = (rep.passed, item.name, detail)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_RESULTS):
        ok, name, detail = _RESULTS[n]
        line = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {name}"
        terminalreporter.write_line(line + (f"  ({detail})" if detail else ""))


@pytest.fixture
def record(request):
    """Attach a one-line summary to the current acceptance test."""
    def _record(text: str) -> None:
        request.node.criterion_detail = text
        print(text)
    return _record
