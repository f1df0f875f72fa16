"""Test-wide configuration: per-criterion result lines after the pytest summary."""

from __future__ import annotations

_CRITERIA_PREFIX = "test_acceptance.py::"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results: dict[str, str] = {}
    for outcome, label in (("passed", "PASS"), ("failed", "FAIL"), ("error", "FAIL")):
        for report in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(report, "nodeid", "")
            if _CRITERIA_PREFIX in nodeid:
                name = nodeid.split("::")[-1]
                results.setdefault(name, label)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(results):
        terminalreporter.write_line(f"{results[name]}  {name}")
