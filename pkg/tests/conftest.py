"""Shared fixtures: the acceptance gate records one verdict per criterion."""

import pytest

_VERDICTS: list[tuple[str, bool, str]] = []


@pytest.fixture
def check():
    """Record a named pass/fail verdict, then assert it."""

    def _check(name: str, ok: bool, detail: str = "") -> None:
        _VERDICTS.append((name, bool(ok), detail))
        assert ok, f"{name}: {detail}"

    return _check


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _VERDICTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
