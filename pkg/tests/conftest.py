"""Collects acceptance-criterion outcomes and prints one line per criterion."""

import pytest

_outcomes: dict[str, tuple[str, str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label, title): an acceptance criterion reported in the summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        label, title = marker.args
        detail = "; ".join(str(v) for k, v in rep.user_properties if k == "detail")
        status = "PASS" if rep.passed else ("SKIP" if rep.skipped else "FAIL")
        _outcomes[label] = (status, title, detail)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_outcomes, key=lambda s: int(s.lstrip("AC"))):
        status, title, detail = _outcomes[label]
        line = f"{label:<5} {status}  {title}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)
