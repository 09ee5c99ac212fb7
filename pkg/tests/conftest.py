import pytest

# criterion number -> (description, verdict); filled by tests/test_acceptance.py
CRITERIA: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(n): acceptance criterion n")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None or rep.when != "call":
        return
    n = mark.args[0]
    desc = mark.kwargs.get("desc", item.name)
    if rep.passed:
        verdict = "PASS"
    elif hasattr(rep, "wasxfail"):
        verdict = "FAIL (expected: " + rep.wasxfail + ")"
    elif rep.skipped:
        verdict = "SKIP"
    else:
        verdict = "FAIL"
    prev = CRITERIA.get(n)
    if prev is not None and prev[1] != "PASS":
        verdict = prev[1] if verdict == "PASS" else verdict
    CRITERIA[n] = (desc if prev is None else prev[0], verdict)


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        desc, verdict = CRITERIA[n]
        terminalreporter.write_line(f"criterion {n}: {verdict}  {desc}")
