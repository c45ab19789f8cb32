import pytest

_RESULTS_KEY = pytest.StashKey[dict]()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")
    config.stash[_RESULTS_KEY] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when not in ("setup", "call"):
        return
    if rep.when == "setup" and rep.passed:
        return
    number, title = mark.args
    results = item.config.stash[_RESULTS_KEY]
    ok, title_, parts = results.get(number, (True, title, []))
    parts.append(item.name)
    results[number] = (ok and rep.passed, title_, parts)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash[_RESULTS_KEY]
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        ok, title, parts = results[number]
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"criterion {number:2d} {status}  {title}  ({len(parts)} test(s))")
