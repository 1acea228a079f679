import pytest

_CRITERIA = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion test")


@pytest.fixture
def detail(request):
    """Attach a measured-values string to the acceptance summary line."""

    def record(text):
        request.node.criterion_detail = text

    return record


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is not None and rep.when == "call":
        _CRITERIA.append((mark.args[0], mark.args[1], rep.passed, getattr(item, "criterion_detail", "")))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number, title, ok, info in sorted(_CRITERIA, key=lambda c: str(c[0])):
        line = f"criterion {number} {title}: {'PASS' if ok else 'FAIL'}"
        terminalreporter.write_line(f"{line} [{info}]" if info else line)
