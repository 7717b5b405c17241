"""Shared pytest plumbing: collects acceptance-criterion outcomes and
prints one PASS/FAIL line per criterion in the terminal summary."""

from __future__ import annotations

_criterion_lines: dict[int, str] = {}


def record_criterion(number: int, label: str, ok: bool, note: str = "") -> None:
    verdict = "PASS" if ok else "FAIL"
    line = f"CRITERION {number:2d} [{label}]: {verdict}"
    if note:
        line += f" - {note}"
    _criterion_lines[number] = line


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _criterion_lines:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criterion_lines):
        terminalreporter.write_line(_criterion_lines[number])
