import pytest

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        _CRITERIA[number] = (title, "PASS" if rep.passed else "FAIL", _reason(rep))


def _reason(rep):
    if not rep.failed:
        return []
    crash = getattr(rep.longrepr, "reprcrash", None)
    msg = crash.message if crash is not None else str(rep.longrepr)
    return [msg.splitlines()[0]]


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, status, why = _CRITERIA[number]
        line = f"criterion {number:2d}: {status}  {title}"
        if why:
            line += f"  -- {why[0][:160]}"
        terminalreporter.write_line(line)
