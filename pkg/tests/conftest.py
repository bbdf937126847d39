"""Shared pytest plumbing: collects one verdict line per acceptance
criterion and prints them in the terminal summary."""

from typing import List

_verdicts: List[str] = []


def record_verdict(line: str) -> None:
    _verdicts.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _verdicts:
        terminalreporter.section("acceptance criteria")
        for line in _verdicts:
            terminalreporter.write_line(line)
