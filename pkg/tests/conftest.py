import pytest

from crsconf.corpus import list_cases, load_case

_results = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(n, title): numbered acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None or (rep.when != "call" and not rep.failed):
        return
    n, title = mark.args
    ok, _ = _results.get(n, (True, title))
    _results[n] = (ok and rep.passed, title)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_results):
        ok, title = _results[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {title}")


def valid_cases():
    return [c for c in list_cases() if "rejected" not in load_case(c).expected]


@pytest.fixture(scope="session")
def corpus():
    return {c: load_case(c) for c in valid_cases()}
