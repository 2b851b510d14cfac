"""Shared fixtures and the acceptance-criterion reporter.

Acceptance tests register one record per criterion; a terminal-summary hook
prints a single PASS/FAIL line for each so the outcome is visible regardless
of pytest's capture settings.
"""

from __future__ import annotations

import dataclasses

import pytest


@dataclasses.dataclass
class CriterionRecord:
    number: int
    title: str
    passed: bool
    detail: str


_RECORDS: list[CriterionRecord] = []


def record_criterion(number: int, title: str, passed: bool, detail: str) -> None:
    _RECORDS.append(CriterionRecord(number, title, passed, detail))


@pytest.fixture
def criterion():
    """Record an acceptance criterion result, then assert it."""

    def _check(number: int, title: str, passed: bool, detail: str) -> None:
        record_criterion(number, title, passed, detail)
        assert passed, f"criterion {number} ({title}): {detail}"

    return _check


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _RECORDS:
        return
    terminalreporter.section("acceptance criteria")
    for rec in sorted(_RECORDS, key=lambda r: r.number):
        status = "PASS" if rec.passed else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {rec.number:2d}: {rec.title} — {rec.detail}")
