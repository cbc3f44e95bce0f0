"""Shared pytest plumbing: the acceptance gate prints one verdict line per criterion."""

import pytest

_VERDICTS: list[tuple[str, bool, str]] = []


class Gate:
    def check(self, label: str, passed: bool, detail: str):
        line = (label, bool(passed), detail)
        _VERDICTS.append(line)
        print(f"{'PASS' if passed else 'FAIL'} {label}: {detail}")
        assert passed, f"{label}: {detail}"


@pytest.fixture
def gate():
    return Gate()


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for label, passed, detail in _VERDICTS:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'} {label}: {detail}")
