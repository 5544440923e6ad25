import pytest

_acceptance = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    key = item.nodeid
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        _acceptance[key] = (marker.args[0], marker.args[1], rep.passed, rep.duration)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number, title, passed, duration in sorted(_acceptance.values(), key=lambda r: r[0]):
        tr.write_line(f"{'PASS' if passed else 'FAIL'}  AC{number}: {title}  ({duration:.2f}s)")
