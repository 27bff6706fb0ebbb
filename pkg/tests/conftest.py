"""Shared fixtures and the acceptance summary printed at the end of a run."""

from __future__ import annotations

import pytest

_KEY = pytest.StashKey[dict]()


def _results(config) -> dict:
    if _KEY not in config.stash:
        config.stash[_KEY] = {}
    return config.stash[_KEY]


@pytest.fixture
def acceptance(request):
    """Record ``(criterion, check, passed, detail)`` and assert the check."""
    store = _results(request.config)

    def record(criterion: int, title: str, check: str, passed: bool, detail: str = "") -> None:
        entry = store.setdefault(criterion, {"title": title, "checks": []})
        entry["checks"].append((check, bool(passed), detail))
        assert passed, f"criterion {criterion} ({check}): {detail}"

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    store = _results(config)
    if not store:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for criterion in sorted(store):
        entry = store[criterion]
        ok = all(passed for _, passed, _ in entry["checks"])
        tr.write_line(f"criterion {criterion}: {'PASS' if ok else 'FAIL'}  {entry['title']}")
        for check, passed, detail in entry["checks"]:
            mark = "ok  " if passed else "FAIL"
            tr.write_line(f"    [{mark}] {check}: {detail}")
