import pytest


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance(name): exit-criterion test; reported pass/fail by name"
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when != "call":
        return
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    label = marker.kwargs.get("name", item.name)
    status = "PASS" if report.passed else "FAIL"
    reporter = item.config.pluginmanager.get_plugin("terminalreporter")
    if reporter is not None:
        reporter.write_line(f"[ACCEPTANCE] {label}: {status} ({report.duration:.2f}s)")
